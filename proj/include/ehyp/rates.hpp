#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ehyp/effective.hpp"
#include "ehyp/germ.hpp"

namespace ehyp {

/// Admissible class at one index.
struct ParamStep {
  double r = 0, tau = 0, sigma = 0, kappa = 0, gamma = 0;
};

/// Parameters for indices [n_min, n_min + N], one more than the germs.
struct ParamSeq {
  long n_min = 0;
  double alpha = 1.0;
  double delta = 0.0;      ///< rate margin used by the recursions
  double xi = 0.0;         ///< smallness of beta r^alpha and beta / kappa
  double gamma_bar = 0.0;  ///< bound on sigma + kappa r^alpha
  std::vector<ParamStep> steps;
  std::vector<double> c, c_hat;  ///< filled by the Theorem D construction

  long n_max() const { return n_min + static_cast<long>(steps.size()) - 1; }
  const ParamStep& at(long n) const { return steps.at(n - n_min); }
};

/// Rates at one index after accounting for the nonlinear error.
struct DerivedRates {
  double eps_f = 0, eps_u = 0, eps_s = 0, eps_chi = 0, eps_check = 0, eps_sigma = 0;
  double lambda_u_hat = 0, lambda_s_hat = 0, lambda_s_check = 0, chi = 0;
  double rho_c1 = 0, rho_c2 = 0;  ///< rho_n(t) = c1 t^alpha + c2 t^{2 alpha}
};

/// Rates from the linear data at n, the classes at n and n+1 and the
/// coefficient z of the modulus Z^f(t) = z t^alpha (normally beta_n).
/// Throws RateOverflow when eps_f >= e^{lambda_u} / (1 + gamma_n).
DerivedRates derived_rates(const LinearStep& s, const ParamStep& p, const ParamStep& next,
                           double alpha, double z, long index = 0);
std::vector<DerivedRates> derived_rates(const LinearData& lin, const ParamSeq& params,
                                        const std::vector<double>* z = nullptr);

/// Condition bits reported by check_theorem_c; a set bit means it holds.
enum Cond : std::uint32_t {
  kRecR = 1u << 0,
  kRecT = 1u << 1,
  kRecS = 1u << 2,
  kRecK = 1u << 3,
  kBdR = 1u << 4,
  kBdB = 1u << 5,
  kBdT = 1u << 6,
  kBdK = 1u << 7,
  kBdS = 1u << 8,
  kHpR = 1u << 9,      ///< r_{n+1} <= e^{lambda_u_hat} r_n - eps_f tau_n
  kHpT = 1u << 10,     ///< tau_{n+1} >= e^{lambda_s_check} tau_n
  kHpSigma = 1u << 11, ///< sigma_{n+1} >= e^{lambda_s - lambda_u_hat} sigma_n + eps_sigma
  kHpGamma = 1u << 12, ///< gamma_{n+1} >= min(e^{lambda_s_hat - lambda_u_hat} gamma_n, sigma + kappa r^alpha)
  kHpKappa = 1u << 13, ///< Hölder constant propagates with rho_n
};
constexpr std::uint32_t kTheoremCBits = (1u << 9) - 1;
constexpr std::uint32_t kHpBits = ((1u << 14) - 1) & ~kTheoremCBits;

const char* cond_name(std::uint32_t bit);

struct TheoremCReport {
  long n_min = 0;
  std::vector<std::uint32_t> flags;  ///< per germ index
  bool theorem_c_ok = false;
  bool hp_ok = false;
  long first_failure = 0;  ///< index of the first Theorem C failure
  std::string first_failure_name;
  bool holds_at(long n, std::uint32_t bits) const {
    return (flags.at(n - n_min) & bits) == bits;
  }
};

/// Recursions and bounds for every germ index of the window, using the
/// margin delta, xi and gamma_bar stored in params.
TheoremCReport check_theorem_c(const LinearData& lin, const ParamSeq& params);

struct SmallnessResult {
  double xi = 0.1, gamma_bar = 0.1, zeta = 0;
  int halvings = 0;
};

/// Halve xi and gamma_bar from 0.1 until the inequalities that make the
/// Theorem C conditions sufficient hold on the window with margin delta.
SmallnessResult find_xi_gamma(const LinearData& lin, double delta);

/// Target rates; requires chi_hat_u > chi_bar_u > 0 and chi_hat_s < chi_bar_s < 0.
struct RateTargets {
  double chi_hat_u = 0, chi_bar_u = 0, chi_hat_s = 0, chi_bar_s = 0;
  void validate() const;
  double delta() const;
};

struct Seeds {
  double r_bar = 0, tau_bar = 0, sigma_bar = 0, kappa_bar = 0;
  std::optional<double> kappa_hat;
  double gamma_bar = 0, xi = 0, beta_bar = 1;
};

struct TheoremDResult {
  ParamSeq params;
  TheoremCReport check;
  double delta = 0, delta_prime = 0;
  double M0_s = 0;
  double kappa_hat = 0;
  std::vector<double> M_u;  ///< M_n at chi_hat_u
  bool c_bound_ok = false;     ///< c_n >= e^{-M_n}
  bool theta_bound_ok = false; ///< sin theta_{n+1} >= c_{n+1}^alpha / beta_bar
};

/// Parameter sequence of the Theorem D construction. Throws SeedTooLarge
/// when the seeds violate their bounds or the result fails check_theorem_c.
TheoremDResult build_params_theorem_d(const LinearData& lin, const RateTargets& rates,
                                      const Seeds& seeds);

/// Radius r_hat_n of the region controlled at index n.
double hat_r(const LinearData& lin, const ParamSeq& params, long n);

}  // namespace ehyp
