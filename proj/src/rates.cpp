#include "ehyp/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ehyp/errors.hpp"

namespace ehyp {

namespace {

constexpr double kRel = 1e-12;

bool le(double a, double b) { return a <= b + kRel * std::max(std::abs(a), std::abs(b)); }
bool ge(double a, double b) { return le(b, a); }

double safe_exp(double x) { return std::exp(x); }

}  // namespace

DerivedRates derived_rates(const LinearStep& s, const ParamStep& p, const ParamStep& next,
                           double alpha, double z, long index) {
  DerivedRates d;
  const double g = p.gamma, g1 = next.gamma;
  const double eu = safe_exp(s.lambda_u), es = safe_exp(s.lambda_s);
  d.eps_f = z * std::pow(p.tau + p.r * (1.0 + g), alpha);
  if (!(d.eps_f < eu / (1.0 + g))) {
    std::ostringstream os;
    os << "nonlinear error " << d.eps_f << " exceeds e^lambda_u/(1+gamma) = " << eu / (1.0 + g)
       << " at n = " << index;
    throw RateOverflow(index, os.str());
  }
  d.eps_u = (1.0 + g) * d.eps_f;
  const double ehu = eu - d.eps_u;
  d.lambda_u_hat = std::log(ehu);
  if (d.eps_f == 0.0) d.eps_s = 0.0;
  else d.eps_s = std::max(1.0 + 1.0 / g, 1.0 + g1) * d.eps_f;
  d.lambda_s_hat = std::log(es + d.eps_s);
  d.eps_chi = std::log(std::max((1.0 - g1) / (1.0 + g), std::sin(s.theta_next) / (1.0 + g)));
  d.chi = d.lambda_u_hat + d.eps_chi;
  const double ratio = es / ehu;  // e^{lambda_s - lambda_u_hat}
  d.eps_check = (1.0 + ratio * g) * d.eps_f + (1.0 + g) * d.eps_f * d.eps_f / ehu;
  d.lambda_s_check = std::log(es + d.eps_check);
  d.rho_c1 = (1.0 + ratio * g) * z / ehu;
  d.rho_c2 = z * z / (ehu * ehu);
  d.eps_sigma = ratio * p.kappa * std::pow(d.eps_f * p.tau / ehu, alpha) +
                (1.0 + g) * z / ehu *
                    std::pow((1.0 + d.eps_f * (1.0 + g) / ehu) * p.tau, alpha);
  return d;
}

std::vector<DerivedRates> derived_rates(const LinearData& lin, const ParamSeq& params,
                                        const std::vector<double>* z) {
  if (params.n_min != lin.n_min || params.steps.size() != lin.size() + 1)
    throw PreconditionViolated("parameter sequence must cover [n_min, n_max + 1]");
  std::vector<DerivedRates> out;
  out.reserve(lin.size());
  for (std::size_t i = 0; i < lin.size(); ++i) {
    double zi = z ? z->at(i) : lin.steps[i].beta;
    out.push_back(derived_rates(lin.steps[i], params.steps[i], params.steps[i + 1], lin.alpha, zi,
                                lin.n_min + static_cast<long>(i)));
  }
  return out;
}

const char* cond_name(std::uint32_t bit) {
  switch (bit) {
    case kRecR: return "rec-r";
    case kRecT: return "rec-t";
    case kRecS: return "rec-s";
    case kRecK: return "rec-k";
    case kBdR: return "bd-r";
    case kBdB: return "bd-b";
    case kBdT: return "bd-t";
    case kBdK: return "bd-k";
    case kBdS: return "bd-s";
    case kHpR: return "hp-r";
    case kHpT: return "hp-tau";
    case kHpSigma: return "hp-sigma";
    case kHpGamma: return "hp-gamma";
    case kHpKappa: return "hp-kappa";
    default: return "?";
  }
}

TheoremCReport check_theorem_c(const LinearData& lin, const ParamSeq& params) {
  if (params.n_min != lin.n_min || params.steps.size() != lin.size() + 1)
    throw PreconditionViolated("parameter sequence must cover [n_min, n_max + 1]");
  TheoremCReport rep;
  rep.n_min = lin.n_min;
  rep.flags.resize(lin.size());
  rep.theorem_c_ok = true;
  rep.hp_ok = true;
  const double a = lin.alpha, dl = params.delta;
  for (std::size_t i = 0; i < lin.size(); ++i) {
    const LinearStep& s = lin.steps[i];
    const ParamStep& p = params.steps[i];
    const ParamStep& q = params.steps[i + 1];
    std::uint32_t f = 0;
    auto set = [&f](bool ok, std::uint32_t bit) {
      if (ok) f |= bit;
    };
    set(le(q.r, std::exp(s.lambda_u - dl) * p.r), kRecR);
    set(ge(q.tau, std::exp(s.lambda_s + dl) * p.tau), kRecT);
    set(ge(q.sigma, std::exp(s.lambda_s - s.lambda_u + dl) * p.sigma), kRecS);
    set(ge(q.kappa, std::exp(s.lambda_s - (1.0 + a) * s.lambda_u + dl) * p.kappa), kRecK);
    const double ra = std::pow(p.r, a);
    set(le(s.beta * ra, params.xi), kBdR);
    set(le(s.beta, params.xi * p.kappa), kBdB);
    set(le(p.tau, p.r), kBdT);
    set(le(p.kappa * std::pow(p.tau, a), p.sigma), kBdK);
    set(le(p.sigma + p.kappa * ra, params.gamma_bar), kBdS);
    try {
      DerivedRates d = derived_rates(s, p, q, a, s.beta, lin.n_min + static_cast<long>(i));
      const double ehu = std::exp(d.lambda_u_hat), es = std::exp(s.lambda_s);
      set(le(q.r, ehu * p.r - d.eps_f * p.tau), kHpR);
      set(ge(q.tau, std::exp(d.lambda_s_check) * p.tau), kHpT);
      set(ge(q.sigma, es / ehu * p.sigma + d.eps_sigma), kHpSigma);
      set(ge(q.gamma, std::min(std::exp(d.lambda_s_hat) / ehu * p.gamma,
                               q.sigma + q.kappa * std::pow(q.r, a))),
          kHpGamma);
      set(ge(q.kappa * std::pow(ehu, a), es / ehu * p.kappa + d.rho_c1 + d.rho_c2 * ra),
          kHpKappa);
    } catch (const RateOverflow&) {
    }
    rep.flags[i] = f;
    if ((f & kTheoremCBits) != kTheoremCBits && rep.theorem_c_ok) {
      rep.theorem_c_ok = false;
      rep.first_failure = lin.n_min + static_cast<long>(i);
      for (std::uint32_t b = 1; b < (1u << 9); b <<= 1)
        if (!(f & b)) {
          rep.first_failure_name = cond_name(b);
          break;
        }
    }
    if ((f & kHpBits) != kHpBits) rep.hp_ok = false;
  }
  return rep;
}

SmallnessResult find_xi_gamma(const LinearData& lin, double delta) {
  if (!(delta > 0.0)) throw PreconditionViolated("delta must be positive");
  SmallnessResult res;
  const double a = lin.alpha;
  res.zeta = delta / (3.0 + a);
  const double z = res.zeta;
  const double L1 = std::exp(lin.L + z);
  for (int it = 0; it < 200; ++it) {
    const double xi = res.xi, gb = res.gamma_bar;
    bool xi_ok = true, gamma_ok = true, joint_ok = true;
    if (!(std::log((1.0 - gb) / (1.0 + gb)) >= -2.0 * z)) gamma_ok = false;
    for (const auto& s : lin.steps) {
      const double eu = std::exp(s.lambda_u);
      if (!(eu - 6.0 * xi >= std::exp(s.lambda_u - z))) xi_ok = false;
      if (!(std::exp(s.lambda_u - z) - 3.0 * xi >= std::exp(s.lambda_u - delta))) xi_ok = false;
      if (!std::isfinite(s.lambda_s)) continue;
      const double es = std::exp(s.lambda_s);
      const double chk = es + (1.0 + L1 * gb) * 3.0 * xi + (1.0 + gb) * L1 * 9.0 * xi * xi;
      if (!(std::log(chk) <= s.lambda_s + z)) joint_ok = false;
      const double gap = s.lambda_s - s.lambda_u;
      if (!(std::exp(gap + z) + L1 * (1.0 + L1 * gb) * xi + L1 * L1 * xi * xi <=
            std::exp(gap + 2.0 * z)))
        joint_ok = false;
      const double l2 = std::pow(L1, 1.0 + a) * std::pow(3.0 * xi, a) +
                        L1 * (1.0 + gb) * xi * std::pow(1.0 + 3.0 * L1 * xi * (1.0 + gb), a);
      if (!(std::exp(gap + z) + l2 <= std::exp(gap + delta))) joint_ok = false;
    }
    if (xi_ok && gamma_ok && joint_ok) return res;
    if (!gamma_ok) res.gamma_bar *= 0.5;
    if (!xi_ok || !joint_ok) res.xi *= 0.5;
    ++res.halvings;
  }
  throw NoConvergence("no admissible xi, gamma_bar found");
}

void RateTargets::validate() const {
  if (!(chi_hat_u > chi_bar_u && chi_bar_u > 0.0))
    throw ConfigError("rates must satisfy chi_hat_u > chi_bar_u > 0");
  if (!(chi_hat_s < chi_bar_s && chi_bar_s < 0.0))
    throw ConfigError("rates must satisfy chi_hat_s < chi_bar_s < 0");
}

double RateTargets::delta() const {
  return std::min(chi_hat_u - chi_bar_u, chi_bar_s - chi_hat_s);
}

TheoremDResult build_params_theorem_d(const LinearData& lin, const RateTargets& rates,
                                      const Seeds& seeds) {
  rates.validate();
  if (lin.size() == 0) throw PreconditionViolated("empty window");
  TheoremDResult out;
  const double a = lin.alpha;
  const std::size_t N = lin.size();
  out.delta = rates.delta();
  out.delta_prime = out.delta / (2.0 * a);
  const double dp = out.delta_prime;
  const double Lp = (1.0 + 1.0 / a) * lin.L;
  out.kappa_hat = seeds.kappa_hat ? *seeds.kappa_hat
                                  : seeds.kappa_bar * std::exp(a * N * rates.chi_bar_u);

  auto fail = [](const std::string& m) { throw SeedTooLarge(m); };
  if (lin.steps[0].beta > seeds.beta_bar) fail("beta_0 exceeds beta_bar");
  if (!le(seeds.tau_bar, seeds.r_bar)) fail("tau_bar must not exceed r_bar");
  if (!le(out.kappa_hat * std::pow(seeds.tau_bar, a), seeds.sigma_bar))
    fail("kappa_hat tau_bar^alpha must not exceed sigma_bar");
  if (!le(seeds.sigma_bar + out.kappa_hat * std::pow(seeds.r_bar, a), seeds.gamma_bar))
    fail("sigma_bar + kappa_hat r_bar^alpha must not exceed gamma_bar");
  if (!le(std::exp(Lp) * seeds.beta_bar * std::pow(seeds.r_bar, a), seeds.xi))
    fail("e^{L'} beta_bar r_bar^alpha must not exceed xi");
  if (!le(std::exp(Lp) * seeds.beta_bar, seeds.xi * seeds.kappa_bar))
    fail("e^{L'} beta_bar must not exceed xi kappa_bar");

  const EffectiveSeries es = effective_series(lin, seeds.beta_bar);
  const std::vector<double> le_seq = es.lambda_e();
  std::vector<double> c(N + 1), ch(N + 1);
  c[0] = 1.0;
  ch[0] = std::exp(-static_cast<double>(N) * rates.chi_bar_u);
  for (std::size_t n = 0; n < N; ++n) {
    c[n + 1] = std::min(std::exp(le_seq[n] - dp) * c[n], 1.0);
    ch[n + 1] = std::min(std::exp(le_seq[n] - dp) * ch[n], 1.0);
  }
  out.M_u = m_sequence(le_seq, rates.chi_hat_u);

  // M_0^s: least value with sum_{k<n} lambda_s_k <= n chi_hat_s - M_n + M_0^s.
  double m0s = 0.0, ssum = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    ssum += lin.steps[n - 1].lambda_s;
    m0s = std::max(m0s, ssum - static_cast<double>(n) * rates.chi_hat_s + out.M_u[n]);
  }
  out.M0_s = m0s;

  ParamSeq& P = out.params;
  P.n_min = lin.n_min;
  P.alpha = a;
  P.delta = a * dp;
  P.xi = seeds.xi;
  P.gamma_bar = seeds.gamma_bar;
  P.c = c;
  P.c_hat = ch;
  P.steps.resize(N + 1);
  double tsum = 0.0;
  for (std::size_t n = 0; n <= N; ++n) {
    ParamStep& st = P.steps[n];
    if (n > 0) tsum += lin.steps[n - 1].lambda_s + dp;
    st.r = seeds.r_bar * c[n];
    st.kappa = std::min(seeds.kappa_bar * std::pow(ch[n], -a), out.kappa_hat * std::pow(c[n], -a));
    st.tau = seeds.tau_bar * std::exp(-m0s + tsum);
    st.sigma = out.kappa_hat * std::pow(c[n], -a) * std::pow(st.tau, a);
    st.gamma = seeds.gamma_bar;
  }

  out.c_bound_ok = true;
  for (std::size_t n = 0; n <= N; ++n)
    if (!ge(c[n], std::exp(-out.M_u[n]))) out.c_bound_ok = false;
  out.theta_bound_ok = true;
  for (std::size_t n = 0; n < N; ++n)
    if (!ge(std::sin(lin.steps[n].theta_next), std::pow(c[n + 1], a) / seeds.beta_bar))
      out.theta_bound_ok = false;

  out.check = check_theorem_c(lin, P);
  if (!out.check.theorem_c_ok) {
    std::ostringstream os;
    os << "constructed parameters fail " << out.check.first_failure_name << " at n = "
       << out.check.first_failure;
    throw SeedTooLarge(os.str());
  }
  return out;
}

double hat_r(const LinearData& lin, const ParamSeq& params, long n) {
  const long i = n - lin.n_min;
  if (i < 0 || i > static_cast<long>(lin.size())) throw std::out_of_range("hat_r index");
  const double dl = params.delta;
  double expo = 0.0, tail = 0.0;
  for (long k = 0; k < i; ++k) {
    tail += std::exp(expo) * params.steps[k].tau;
    expo += -lin.steps[k].lambda_u + dl;
  }
  return std::exp(expo) * params.steps[i].r + 3.0 * params.xi * tail;
}

}  // namespace ehyp
