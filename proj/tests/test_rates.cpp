#include <doctest.h>

#include <cmath>

#include "ehyp/catalog.hpp"
#include "ehyp/errors.hpp"
#include "ehyp/rates.hpp"

using namespace ehyp;

namespace {

LinearData make_lin(const std::vector<double>& lu, const std::vector<double>& ls, double L) {
  LinearData lin;
  lin.L = L;
  for (std::size_t i = 0; i < lu.size(); ++i) {
    LinearStep s;
    s.lambda_u = lu[i];
    s.lambda_s = ls[i];
    s.theta = s.theta_next = M_PI / 2;
    lin.steps.push_back(s);
  }
  return lin;
}

// Parameters that follow the four recursions with equality.
ParamSeq exact_params(const LinearData& lin, double delta, ParamStep p0) {
  ParamSeq p;
  p.alpha = lin.alpha;
  p.delta = delta;
  p.steps.push_back(p0);
  for (const auto& s : lin.steps) {
    ParamStep q = p.steps.back();
    q.r *= std::exp(s.lambda_u - delta);
    q.tau *= std::exp(s.lambda_s + delta);
    q.sigma *= std::exp(s.lambda_s - s.lambda_u + delta);
    q.kappa *= std::exp(s.lambda_s - (1 + lin.alpha) * s.lambda_u + delta);
    p.steps.push_back(q);
  }
  return p;
}

}  // namespace

TEST_CASE("derived rates of a linear germ") {
  LinearStep s;
  s.lambda_u = std::log(2.0);
  s.lambda_s = -std::log(2.0);
  s.theta = s.theta_next = M_PI / 2;
  ParamStep p{0.1, 0.0, 0.01, 1.0, 0.05};
  auto d = derived_rates(s, p, p, 1.0, 0.0);
  CHECK(d.eps_f == 0.0);
  CHECK(d.lambda_u_hat == doctest::Approx(s.lambda_u));
  CHECK(d.lambda_s_check == doctest::Approx(s.lambda_s));
  CHECK(d.chi == doctest::Approx(s.lambda_u - std::log(1.05)));
  CHECK(d.eps_sigma == 0.0);
}

TEST_CASE("derived rates by hand") {
  LinearStep s;
  s.lambda_u = std::log(2.0);
  s.lambda_s = -std::log(2.0);
  s.theta = s.theta_next = M_PI / 2;
  ParamStep p{0.1, 0.0, 0.01, 1.0, 0.05};
  auto d = derived_rates(s, p, p, 1.0, 2.0);
  CHECK(d.eps_f == doctest::Approx(0.21));
  CHECK(std::exp(d.lambda_u_hat) == doctest::Approx(1.7795));
  CHECK(d.eps_sigma == 0.0);

  ParamStep big{0.95, 0.0, 0.01, 1.0, 0.05};
  CHECK_THROWS_AS(derived_rates(s, big, big, 1.0, 2.0, 7), RateOverflow);
}

TEST_CASE("theorem C flags on exact recursions") {
  auto lin = make_lin(std::vector<double>(5, std::log(2.0)), std::vector<double>(5, -std::log(2.0)),
                      std::log(2.0));
  for (double delta : {0.01, 0.1, 0.3}) {
    ParamSeq p = exact_params(lin, delta, {0.01, 1e-9, 0.05, 1e6, 0});
    p.xi = 1.0;
    p.gamma_bar = 2e4;
    auto rep = check_theorem_c(lin, p);
    CHECK(rep.theorem_c_ok);
    for (long n = 0; n < 5; ++n) CHECK(rep.holds_at(n, kTheoremCBits));
  }
}

TEST_CASE("theorem C flags detect violations") {
  auto lin = make_lin(std::vector<double>(5, std::log(2.0)), std::vector<double>(5, -std::log(2.0)),
                      std::log(2.0));
  ParamSeq p = exact_params(lin, 0.1, {0.01, 1e-9, 0.05, 1e6, 0});
  p.xi = 1.0;
  p.gamma_bar = 2e4;
  ParamSeq t = p;
  t.steps[2].tau = 1.0;
  auto rt = check_theorem_c(lin, t);
  CHECK_FALSE(rt.holds_at(2, kBdT));
  CHECK(rt.first_failure <= 2);

  ParamSeq k = p;
  k.steps[3].sigma = 0.0;
  auto rk = check_theorem_c(lin, k);
  CHECK_FALSE(rk.holds_at(3, kBdK));
  CHECK_FALSE(rk.theorem_c_ok);

  ParamSeq r = p;
  r.steps[4].r *= 2;
  auto rr = check_theorem_c(lin, r);
  CHECK_FALSE(rr.holds_at(3, kRecR));
  CHECK(rr.first_failure == 3);
  CHECK(rr.first_failure_name == "rec-r");
}

TEST_CASE("theorem D construction on a short sequence") {
  auto lin = make_lin({1, -1, 1}, {-1.5, -1.5, -1.5}, 1.5);
  RateTargets rates{0.5, 0.3, -0.5, -0.3};
  Seeds seeds;
  seeds.r_bar = 1e-4;
  seeds.kappa_bar = 2100;
  seeds.xi = 0.01;
  seeds.gamma_bar = 0.6;
  auto res = build_params_theorem_d(lin, rates, seeds);
  CHECK(res.delta_prime == doctest::Approx(0.1));
  REQUIRE(res.params.c.size() == 4);
  CHECK(res.params.c[0] == 1.0);
  CHECK(res.params.c[1] == 1.0);
  CHECK(res.params.c[2] == doctest::Approx(std::exp(-1.1)));
  CHECK(res.params.c[3] == doctest::Approx(std::exp(-0.2)));
  CHECK(res.c_bound_ok);
  CHECK(res.check.theorem_c_ok);
}

TEST_CASE("theorem D with a large effective rate keeps r constant") {
  auto lin = make_lin(std::vector<double>(20, 1.0), std::vector<double>(20, -1.5), 1.5);
  RateTargets rates{0.5, 0.3, -0.5, -0.3};
  Seeds seeds;
  seeds.r_bar = 1e-4;
  seeds.kappa_bar = 2100;
  seeds.kappa_hat = 4000;
  seeds.xi = 0.01;
  seeds.gamma_bar = 0.6;
  auto res = build_params_theorem_d(lin, rates, seeds);
  for (const auto& st : res.params.steps) CHECK(st.r == doctest::Approx(1e-4));
}

TEST_CASE("theorem D rejects large seeds") {
  auto lin = make_lin({1, 1}, {-1.5, -1.5}, 1.5);
  RateTargets rates{0.5, 0.3, -0.5, -0.3};
  Seeds seeds;
  seeds.r_bar = 1e-4;
  seeds.kappa_bar = 2100;
  seeds.xi = 0.01;
  seeds.gamma_bar = 0.6;
  seeds.tau_bar = 1e-3;
  CHECK_THROWS_AS(build_params_theorem_d(lin, rates, seeds), SeedTooLarge);
  seeds.tau_bar = 0;
  seeds.r_bar = 1.0;
  CHECK_THROWS_AS(build_params_theorem_d(lin, rates, seeds), SeedTooLarge);
  CHECK_THROWS_AS(build_params_theorem_d(lin, {0.2, 0.3, -0.5, -0.3}, seeds), ConfigError);
}

TEST_CASE("c sequence equals exp(-M) at the reduced rate") {
  Rng rng(17);
  RateTargets rates{0.5, 0.3, -0.5, -0.3};
  for (int t = 0; t < 100; ++t) {
    std::vector<double> lu(40), ls(40, -3.0);
    for (auto& x : lu) x = rng.uniform(-1.0, 2.0);
    auto lin = make_lin(lu, ls, 3.0);
    Seeds seeds;
    seeds.r_bar = 1e-6;
    seeds.kappa_bar = 1e6;
    seeds.kappa_hat = 1e6;
    seeds.xi = 0.5;
    seeds.gamma_bar = 1.5;
    auto res = build_params_theorem_d(lin, rates, seeds);
    auto M = m_sequence(lu, res.delta_prime);
    for (std::size_t n = 0; n < M.size(); ++n) {
      CHECK(res.params.c[n] == doctest::Approx(std::exp(-M[n])).epsilon(1e-12));
      CHECK(res.params.c[n] >= std::exp(-res.M_u[n]) * (1 - 1e-12));
    }
  }
}

TEST_CASE("hat r") {
  auto lin = make_lin(std::vector<double>(4, std::log(2.0)), std::vector<double>(4, -1.0), 1.0);
  ParamSeq p;
  p.delta = 0.1;
  p.xi = 0.05;
  for (int k = 0; k <= 4; ++k) p.steps.push_back({0.2 + 0.01 * k, 0.0, 0, 0, 0});
  CHECK(hat_r(lin, p, 0) == p.steps[0].r);
  CHECK(hat_r(lin, p, 3) == doctest::Approx(std::exp(3 * (0.1 - std::log(2.0))) * p.steps[3].r));

  for (int k = 0; k <= 4; ++k) p.steps[k].tau = 0.01 * std::pow(2.0, -k);
  const double expect = std::exp(0.2) / 4 * p.steps[2].r + 0.15 * (0.01 + std::exp(0.1) / 2 * 0.005);
  CHECK(hat_r(lin, p, 2) == doctest::Approx(expect));
}

TEST_CASE("smallness search") {
  System q = builtin("quad_hyperbolic", {{"n_max", 15}});
  auto lin = extract_linear_data(q.seq, q.split);
  auto sm = find_xi_gamma(lin, 0.2);
  CHECK(sm.xi > 0);
  CHECK(sm.xi <= 0.1);
  CHECK(sm.gamma_bar > 0);
  CHECK(std::log((1 - sm.gamma_bar) / (1 + sm.gamma_bar)) >= -2 * sm.zeta);
  auto again = find_xi_gamma(lin, 0.2);
  CHECK(again.xi == sm.xi);
  CHECK_THROWS_AS(find_xi_gamma(lin, 0.0), PreconditionViolated);
}

TEST_CASE("rate targets") {
  CHECK_NOTHROW(RateTargets({0.5, 0.3, -0.5, -0.3}).validate());
  CHECK(RateTargets({0.5, 0.3, -0.6, -0.3}).delta() == doctest::Approx(0.2));
  CHECK_THROWS_AS(RateTargets({0.5, -0.3, -0.5, -0.3}).validate(), ConfigError);
  CHECK_THROWS_AS(RateTargets({0.5, 0.3, -0.2, -0.3}).validate(), ConfigError);
}
