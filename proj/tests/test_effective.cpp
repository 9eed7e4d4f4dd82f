#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ehyp/catalog.hpp"
#include "ehyp/effective.hpp"
#include "ehyp/errors.hpp"

using namespace ehyp;

namespace {

// Gamma by the definition: every average over [k, n) is at least chi_hat.
std::vector<long> brute_eht(const std::vector<double>& l, double chi_hat) {
  std::vector<long> out;
  for (std::size_t n = 1; n <= l.size(); ++n) {
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) {
      double s = 0;
      for (std::size_t j = k; j < n; ++j) s += l[j];
      ok = s / double(n - k) >= chi_hat - 1e-12;
    }
    if (ok) out.push_back(static_cast<long>(n));
  }
  return out;
}

std::vector<double> brute_m(const std::vector<double>& l, double chi_hat) {
  std::vector<double> M(l.size() + 1, 0.0);
  for (std::size_t n = 1; n <= l.size(); ++n)
    for (std::size_t m = 0; m < n; ++m) {
      double s = 0;
      for (std::size_t k = m; k < n; ++k) s += l[k];
      M[n] = std::max(M[n], double(n - m) * chi_hat - s);
    }
  return M;
}

LinearData make_lin(const std::vector<double>& lu, const std::vector<double>& ls,
                    const std::vector<double>& beta, double L, double alpha = 1.0) {
  LinearData lin;
  lin.alpha = alpha;
  lin.L = L;
  for (std::size_t i = 0; i < lu.size(); ++i) {
    LinearStep s;
    s.lambda_u = lu[i];
    s.lambda_s = ls[i];
    s.theta = s.theta_next = M_PI / 2;
    s.beta = beta[i];
    lin.steps.push_back(s);
  }
  return lin;
}

std::vector<double> random_seq(Rng& rng, int n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("defect and effective rate") {
  auto lin = make_lin({std::log(2.0)}, {std::log(3.0)}, {1.0}, 2.0);
  auto es = effective_series(lin, 10.0);
  CHECK(es.steps[0].delta == doctest::Approx(std::log(1.5)));
  CHECK(es.steps[0].lambda_e == doctest::Approx(std::log(4.0 / 3)));

  auto dom = make_lin({std::log(2.0)}, {-std::log(2.0)}, {1.0}, 1.0);
  CHECK(effective_series(dom, 10.0).steps[0].delta == 0.0);
  CHECK(effective_series(dom, 10.0).steps[0].lambda_e == doctest::Approx(std::log(2.0)));

  auto jump = make_lin({0.5, 0.5}, {-1, -1}, {10, 100}, 5.0);
  auto j = effective_series(jump, 10.0);
  CHECK(j.steps[1].beta_flag);
  CHECK(j.steps[1].lambda_e == doctest::Approx(-std::log(10.0)));
  CHECK_FALSE(j.missing_predecessor);

  auto first = make_lin({0.5}, {-1}, {100}, 5.0);
  auto f = effective_series(first, 10.0);
  CHECK(f.missing_predecessor);
  CHECK(f.steps[0].lambda_e == doctest::Approx(0.5));
}

TEST_CASE("effective hyperbolic times") {
  CHECK(eht_detect({1, 1, -1, 1, 1, 1}, 0.2) == std::vector<long>{1, 2, 5, 6});
  CHECK(eht_detect({-1, 1}, 0.2).empty());
  CHECK(eht_detect(std::vector<double>(7, 0.9), 0.2) == std::vector<long>{1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("eht matches the definition on random sequences") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    auto l = random_seq(rng, 60, -1.0, 1.5);
    CHECK(eht_detect(l, 0.2) == brute_eht(l, 0.2));
  }
}

TEST_CASE("M sequence") {
  auto M = m_sequence({1, -1}, 0.2);
  REQUIRE(M.size() == 3);
  CHECK(M[1] == 0.0);
  CHECK(M[2] == doctest::Approx(1.2));
  for (double m : m_sequence(std::vector<double>(10, 0.3), 0.3)) CHECK(m == 0.0);

  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    auto l = random_seq(rng, 50, -1.0, 1.5);
    auto fast = m_sequence(l, 0.25), slow = brute_m(l, 0.25);
    auto gamma = eht_detect(l, 0.25);
    for (std::size_t n = 0; n < fast.size(); ++n) {
      CHECK(fast[n] == doctest::Approx(slow[n]).epsilon(1e-12));
      bool in_gamma = std::binary_search(gamma.begin(), gamma.end(), static_cast<long>(n));
      if (n > 0) CHECK(in_gamma == (fast[n] == 0.0));
    }
  }
}

TEST_CASE("M bound for the block sequence") {
  std::vector<double> l;
  for (long n = 0; n < 1024; ++n) l.push_back(pliss_rate(n));
  auto M = m_sequence(l, 0.4);
  for (int k = 4; k <= 10; ++k) CHECK(M[1L << k] >= std::ldexp(3 - 0.4, k - 2));
}

TEST_CASE("upper bound for M") {
  auto lin = make_lin({1, 1, 1}, {-1, -1, -1}, {5, 1, 1}, 1.0);
  auto ub = m_upper_bound(lin, 2.0, 0.5);
  CHECK(ub[1] == doctest::Approx(3.5));

  auto calm = make_lin({1, -1, 0.5}, {-1, -1, -1}, {1, 1, 1}, 1.0);
  auto ub2 = m_upper_bound(calm, 2.0, 0.5);
  auto m2 = m_sequence({1, -1, 0.5}, 0.5);
  for (std::size_t n = 0; n < m2.size(); ++n) CHECK(ub2[n] == doctest::Approx(m2[n]));
}

TEST_CASE("upper bound dominates M on random data") {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const int N = 200;
    std::vector<double> lu(N), ls(N), beta(N);
    beta[0] = 1;
    for (int i = 0; i < N; ++i) {
      lu[i] = rng.uniform(-0.5, 1.0);
      ls[i] = rng.uniform(-1.0, 1.0);
      if (i > 0) beta[i] = std::clamp(beta[i - 1] * std::exp(rng.uniform(-1, 1)), 1.0, 50.0);
    }
    auto lin = make_lin(lu, ls, beta, 1.0);
    lin.L = bound_L(lin);
    auto es = effective_series(lin, 3.0);
    auto M = m_sequence(es.lambda_e(), 0.2);
    auto ub = m_upper_bound(lin, 3.0, 0.2);
    for (std::size_t n = 0; n < M.size(); ++n) CHECK(ub[n] >= M[n] - 1e-9);
  }
}

TEST_CASE("pliss lemma") {
  auto all = pliss({1, 1, 1, 1}, 1, 1, 0.5);
  CHECK(all.indices == std::vector<long>{1, 2, 3, 4});
  CHECK(all.rho == doctest::Approx(1.0));
  CHECK(all.bound_holds);

  auto p = pliss({1, 1, -1, 1, 1, 1}, 1, 2.0 / 3, 0.2);
  CHECK(p.indices == std::vector<long>{1, 2, 5, 6});
  CHECK(p.rho * 6 == doctest::Approx(3.5));
  CHECK(p.bound_holds);

  CHECK_THROWS_AS(pliss({1, -1}, 1, 0.5, 0.2), PreconditionViolated);
  CHECK_THROWS_AS(pliss({2, 2}, 1, 0.5, 0.2), PreconditionViolated);
}

TEST_CASE("pliss lemma on random sequences") {
  Rng rng(8);
  int done = 0;
  while (done < 100) {
    auto l = random_seq(rng, 200, -1.0, 1.0);
    double s = 0;
    for (double x : l) s += x;
    if (s < 0.6 * 200) {
      // Shift the sequence up to meet the average hypothesis while keeping the cap.
      double need = (0.6 * 200 - s) / 200;
      for (auto& x : l) x = std::min(1.0, x + 2 * need);
      s = 0;
      for (double x : l) s += x;
      if (s < 0.6 * 200) continue;
    }
    auto r = pliss(l, 1.0, 0.6, 0.2);
    CHECK(r.indices == brute_eht(l, 0.2));
    CHECK(double(r.indices.size()) >= r.rho * 200);
    ++done;
  }
}

TEST_CASE("density bound") {
  auto flat = make_lin(std::vector<double>(10, 0.7), std::vector<double>(10, -1),
                       std::vector<double>(10, 1.0), 1.0);
  auto d = verify_via_beta_density(flat, 5.0);
  CHECK(d.chi_u == doctest::Approx(0.7));
  CHECK(d.bound == doctest::Approx(0.7));

  std::vector<double> beta(10, 1.0);
  beta[4] = 20;
  auto bumpy = make_lin(std::vector<double>(10, 0.7), std::vector<double>(10, -1), beta, 1.0);
  auto b = verify_via_beta_density(bumpy, 5.0);
  CHECK(b.density == doctest::Approx(0.1));
  CHECK(b.bound == doctest::Approx(0.5));
  auto best = verify_via_beta_density(bumpy);
  CHECK(best.bound == doctest::Approx(0.7));

  System alt = builtin("alt_3_half", {{"n_max", 199}});
  auto lin = extract_linear_data(alt.seq, alt.split);
  auto r = verify_via_beta_density(lin);
  CHECK(r.chi_u == doctest::Approx(-std::log(2.0)));
  CHECK_FALSE(r.effectively_hyperbolic);
}

TEST_CASE("effective report on catalog systems") {
  System diag = builtin("diag_linear", {{"n_max", 99}});
  auto rd = effective_report(extract_linear_data(diag.seq, diag.split), 10.0);
  CHECK(rd.chi_e == doctest::Approx(std::log(2.0)));
  CHECK(rd.effectively_hyperbolic);
  CHECK(rd.gamma_count == 100);

  System alt = builtin("alt_3_half", {{"n_max", 99}});
  auto ra = effective_report(extract_linear_data(alt.seq, alt.split), 10.0);
  CHECK(ra.chi_e <= -std::log(2.0) + 1e-12);
  CHECK_FALSE(ra.effectively_hyperbolic);

  System blocks = builtin("pliss_blocks", {{"n_max", 4095}});
  auto rb = effective_report(extract_linear_data(blocks.seq, blocks.split), 10.0);
  CHECK(rb.effectively_hyperbolic);
  CHECK(rb.chi_e > 0.3);
}

TEST_CASE("tail averages") {
  std::vector<double> x{5, 5, 0, 0, 0, 0, 0, 0};
  CHECK(tail_liminf(x) == doctest::Approx(10.0 / 8));
  CHECK(tail_limsup(x) == doctest::Approx(5.0));
}
