#pragma once

#include <optional>
#include <vector>

#include "ehyp/germ.hpp"

namespace ehyp {

struct EffectiveStep {
  double delta = 0;     ///< defect max(0, (lambda_s - lambda_u) / alpha)
  double lambda_e = 0;  ///< effective unstable rate
  bool beta_flag = false;  ///< beta_n > beta_bar
};

struct EffectiveSeries {
  long n_min = 0;
  double alpha = 1, beta_bar = 1, L_prime = 0;
  /// True when the first index exceeded beta_bar and had no predecessor,
  /// so the unpenalised branch was used.
  bool missing_predecessor = false;
  std::vector<EffectiveStep> steps;
  std::vector<double> lambda_e() const;
  std::size_t size() const { return steps.size(); }
};

EffectiveSeries effective_series(const LinearData& lin, double beta_bar);

/// Effective hyperbolic times: n in [1, N] such that every average of
/// lambda_e over [k, n) is at least chi_hat. Linear time.
std::vector<long> eht_detect(const std::vector<double>& lambda_e, double chi_hat);

/// M_n for n in [0, N]: the least M with sum_{k=m}^{n-1} lambda_e_k >= (n-m) chi_hat - M
/// for all m < n. M_n = 0 exactly on the effective hyperbolic times.
std::vector<double> m_sequence(const std::vector<double>& lambda_e, double chi_hat);

/// Upper bound for M_n computed from unpenalised rates, charging 2 L' at
/// every index whose beta exceeds beta_bar.
std::vector<double> m_upper_bound(const LinearData& lin, double beta_bar, double chi_hat);

struct PlissResult {
  std::vector<long> indices;  ///< 1-based
  double rho = 0;
  bool bound_holds = false;   ///< |indices| >= rho N
};

/// Indices n_i in [1, N] with sum_{j=n+1}^{n_i} lambda_j >= chi_hat (n_i - n)
/// for all 0 <= n < n_i (lambda is 1-based in this statement).
PlissResult pliss(const std::vector<double>& lambda, double L, double chi, double chi_hat);

struct DensityReport {
  double chi_u = 0;     ///< average of lambda_u - delta
  double beta_bar = 1;  ///< threshold giving the best bound
  double density = 0;   ///< fraction of indices with beta_n > beta_bar
  double bound = 0;     ///< chi_u - density * L'
  bool effectively_hyperbolic = false;
};

/// Lower bound for chi^e from the density of large beta. When beta_bar is
/// not given the best candidate among the observed beta values is used.
DensityReport verify_via_beta_density(const LinearData& lin,
                                      std::optional<double> beta_bar = std::nullopt);

/// Minimum (maximum) over n >= N/4 of the running average over [0, n).
double tail_liminf(const std::vector<double>& x);
double tail_limsup(const std::vector<double>& x);

struct EffectiveReport {
  double chi_e = 0, chi_g = 0, chi_s = 0;
  double chi_hat = 0, beta_bar = 1;
  double density_lb = 0;  ///< guaranteed density of effective hyperbolic times
  long gamma_count = 0;
  bool effectively_hyperbolic = false;
};

/// chi_hat defaults to half the chi^e estimate.
EffectiveReport effective_report(const LinearData& lin, double beta_bar,
                                 std::optional<double> chi_hat = std::nullopt);

}  // namespace ehyp
