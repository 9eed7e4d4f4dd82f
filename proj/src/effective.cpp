#include "ehyp/effective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ehyp/errors.hpp"

namespace ehyp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// S_n = sum_{j<n} (x_j - c), n in [0, N]
std::vector<double> prefix_excess(const std::vector<double>& x, double c) {
  std::vector<double> s(x.size() + 1, 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) s[j + 1] = s[j] + (x[j] - c);
  return s;
}

double defect(const LinearStep& s, double alpha) {
  if (!std::isfinite(s.lambda_s)) return 0.0;
  return std::max(0.0, (s.lambda_s - s.lambda_u) / alpha);
}
}  // namespace

std::vector<double> EffectiveSeries::lambda_e() const {
  std::vector<double> out(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) out[i] = steps[i].lambda_e;
  return out;
}

EffectiveSeries effective_series(const LinearData& lin, double beta_bar) {
  EffectiveSeries es;
  es.n_min = lin.n_min;
  es.alpha = lin.alpha;
  es.beta_bar = beta_bar;
  es.L_prime = (1.0 + 1.0 / lin.alpha) * lin.L;
  es.steps.resize(lin.size());
  for (std::size_t i = 0; i < lin.size(); ++i) {
    const LinearStep& s = lin.steps[i];
    EffectiveStep& e = es.steps[i];
    e.delta = defect(s, lin.alpha);
    double base = s.lambda_u - e.delta;
    e.beta_flag = s.beta > beta_bar;
    if (!e.beta_flag) {
      e.lambda_e = base;
    } else if (i == 0) {
      e.lambda_e = base;
      es.missing_predecessor = true;
    } else {
      e.lambda_e = std::min(base, std::log(lin.steps[i - 1].beta / s.beta) / lin.alpha);
    }
  }
  return es;
}

std::vector<long> eht_detect(const std::vector<double>& lambda_e, double chi_hat) {
  auto S = prefix_excess(lambda_e, chi_hat);
  std::vector<long> out;
  double best = S[0];
  for (std::size_t n = 1; n < S.size(); ++n) {
    if (S[n] >= best) out.push_back(static_cast<long>(n));
    best = std::max(best, S[n]);
  }
  return out;
}

std::vector<double> m_sequence(const std::vector<double>& lambda_e, double chi_hat) {
  auto S = prefix_excess(lambda_e, chi_hat);
  std::vector<double> M(S.size(), 0.0);
  double best = S[0];
  for (std::size_t n = 1; n < S.size(); ++n) {
    M[n] = std::max(0.0, best - S[n]);
    best = std::max(best, S[n]);
  }
  return M;
}

std::vector<double> m_upper_bound(const LinearData& lin, double beta_bar, double chi_hat) {
  const double Lp = (1.0 + 1.0 / lin.alpha) * lin.L;
  std::vector<double> x(lin.size());
  for (std::size_t i = 0; i < lin.size(); ++i) {
    const LinearStep& s = lin.steps[i];
    x[i] = s.lambda_u - defect(s, lin.alpha) - (s.beta > beta_bar ? 2.0 * Lp : 0.0);
  }
  return m_sequence(x, chi_hat);
}

PlissResult pliss(const std::vector<double>& lambda, double L, double chi, double chi_hat) {
  const double N = static_cast<double>(lambda.size());
  const double slack = 1e-12 * std::max(1.0, N);
  if (!(L >= chi && chi > chi_hat && chi_hat > 0.0))
    throw PreconditionViolated("pliss requires L >= chi > chi_hat > 0");
  double sum = 0.0;
  for (double l : lambda) {
    if (l > L + 1e-12) throw PreconditionViolated("pliss requires lambda_j <= L");
    sum += l;
  }
  if (sum < chi * N - slack) throw PreconditionViolated("pliss requires sum lambda_j >= chi N");
  PlissResult r;
  r.indices = eht_detect(lambda, chi_hat);
  r.rho = (chi - chi_hat) / (L - chi_hat);
  r.bound_holds = static_cast<double>(r.indices.size()) >= r.rho * N;
  return r;
}

DensityReport verify_via_beta_density(const LinearData& lin, std::optional<double> beta_bar) {
  DensityReport rep;
  const double N = static_cast<double>(lin.size());
  const double Lp = (1.0 + 1.0 / lin.alpha) * lin.L;
  double sum = 0.0;
  for (const auto& s : lin.steps) sum += s.lambda_u - defect(s, lin.alpha);
  rep.chi_u = N > 0 ? sum / N : 0.0;
  auto density_at = [&](double bb) {
    long c = 0;
    for (const auto& s : lin.steps) c += s.beta > bb;
    return N > 0 ? c / N : 0.0;
  };
  if (beta_bar) {
    rep.beta_bar = *beta_bar;
    rep.density = density_at(*beta_bar);
  } else {
    // The bound is nonincreasing in the density, so scan thresholds from
    // small to large and keep the smallest beta_bar attaining the best bound.
    std::vector<double> cand;
    for (const auto& s : lin.steps) cand.push_back(std::max(1.0, s.beta));
    cand.push_back(1.0);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    double best = -kInf;
    for (double bb : cand) {
      double d = density_at(bb);
      double b = rep.chi_u - d * Lp;
      if (b > best) {
        best = b;
        rep.beta_bar = bb;
        rep.density = d;
      }
    }
  }
  rep.bound = rep.chi_u - rep.density * Lp;
  rep.effectively_hyperbolic = rep.bound > 0.0;
  return rep;
}

namespace {
template <class Cmp>
double tail_extreme(const std::vector<double>& x, Cmp better) {
  const std::size_t N = x.size();
  if (N == 0) return 0.0;
  std::size_t start = std::max<std::size_t>(1, N / 4);
  double sum = 0.0, best = 0.0;
  bool have = false;
  for (std::size_t n = 1; n <= N; ++n) {
    sum += x[n - 1];
    if (n < start) continue;
    double avg = sum / static_cast<double>(n);
    if (!have || better(avg, best)) {
      best = avg;
      have = true;
    }
  }
  return best;
}
}  // namespace

double tail_liminf(const std::vector<double>& x) {
  return tail_extreme(x, [](double a, double b) { return a < b; });
}

double tail_limsup(const std::vector<double>& x) {
  return tail_extreme(x, [](double a, double b) { return a > b; });
}

EffectiveReport effective_report(const LinearData& lin, double beta_bar,
                                 std::optional<double> chi_hat) {
  EffectiveReport rep;
  auto es = effective_series(lin, beta_bar);
  auto le = es.lambda_e();
  std::vector<double> gap(lin.size()), ls(lin.size());
  for (std::size_t i = 0; i < lin.size(); ++i) {
    gap[i] = lin.steps[i].lambda_u - lin.steps[i].lambda_s;
    ls[i] = lin.steps[i].lambda_s;
  }
  rep.chi_e = tail_liminf(le);
  rep.chi_g = tail_liminf(gap);
  rep.chi_s = tail_limsup(ls);
  rep.beta_bar = beta_bar;
  rep.chi_hat = chi_hat ? *chi_hat : std::max(0.0, 0.5 * rep.chi_e);
  rep.effectively_hyperbolic = rep.chi_e > 0.0;
  if (rep.chi_hat > 0.0) {
    rep.gamma_count = static_cast<long>(eht_detect(le, rep.chi_hat).size());
    double top = le.empty() ? 0.0 : *std::max_element(le.begin(), le.end());
    double mean = 0.0;
    for (double v : le) mean += v;
    mean = le.empty() ? 0.0 : mean / static_cast<double>(le.size());
    if (top > rep.chi_hat && mean > rep.chi_hat)
      rep.density_lb = (mean - rep.chi_hat) / (top - rep.chi_hat);
  }
  return rep;
}

}  // namespace ehyp
