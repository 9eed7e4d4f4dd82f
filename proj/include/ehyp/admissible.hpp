#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehyp/linalg.hpp"

namespace ehyp {

/// Class parameters: graphs over B^u(r) with |psi(0)| <= tau,
/// |Dpsi(0)| <= sigma, |Dpsi|_alpha <= kappa and |Dpsi| <= gamma.
struct ClassParams {
  double r = 0, tau = 0, sigma = 0, kappa = 0, gamma = 0, alpha = 1;
};

/// Default interpolation degree per axis for an unstable dimension k.
int default_degree(int k);

/// Graph of psi: B^u(r) -> E^s stored by values and derivatives on a
/// tensor Chebyshev grid covering [-r, r]^k.
class AdmissibleManifold {
 public:
  using ValueFn = std::function<Vec(const Vec&)>;
  using DerivFn = std::function<Mat(const Vec&)>;

  AdmissibleManifold() = default;
  AdmissibleManifold(int k, int s_dim, double r, int degree, ClassParams params = {});

  static AdmissibleManifold sample(int k, int s_dim, double r, int degree, const ValueFn& value,
                                   const DerivFn& deriv, ClassParams params = {});
  static AdmissibleManifold zero(int k, int s_dim, double r, int degree, ClassParams params = {});

  int k() const { return k_; }
  int s_dim() const { return s_; }
  double r() const { return r_; }
  int degree() const { return deg_; }
  const std::vector<double>& axis() const { return axis_; }
  std::size_t node_count() const { return values_.size(); }
  Vec node(std::size_t i) const;

  const Vec& value(std::size_t i) const { return values_[i]; }
  const Mat& deriv(std::size_t i) const { return derivs_[i]; }
  void set_node(std::size_t i, Vec value, Mat deriv);

  /// psi(v); throws OutOfDomain when |v| > r.
  Vec evaluate(const Vec& v) const;
  Mat derivative(const Vec& v) const;
  /// Same without the domain check (smooth extension over the grid cube).
  Vec evaluate_unchecked(const Vec& v) const;
  Mat derivative_unchecked(const Vec& v) const;

  /// Largest gap between the stored derivatives and the derivative of the
  /// value interpolant at the nodes.
  double consistency_error() const;

  ClassParams params;

 private:
  std::vector<double> basis(double x) const;
  std::vector<double> basis_deriv(double x) const;
  void check_domain(const Vec& v) const;
  template <class T>
  T interpolate(const std::vector<T>& data, const Vec& v, const T& zero) const;

  int k_ = 1, s_ = 1, deg_ = 16;
  double r_ = 0;
  std::vector<double> axis_, weights_;
  Mat diff_;  // Chebyshev differentiation matrix along one axis
  std::vector<Vec> values_;
  std::vector<Mat> derivs_;

  friend AdmissibleManifold manifold_from_json(const nlohmann::json& j);
};

struct ClassCheck {
  bool member = false;
  double tau_est = 0, sigma_est = 0, holder_est = 0, dpsi_max = 0;
  std::string violation;  ///< empty for members
  double magnitude = 0;   ///< estimate / bound for the violated condition
};

/// Sampled Hölder seminorm of Dpsi over pairs of nodes in the ball plus
/// near-diagonal refinements.
double holder_seminorm(const AdmissibleManifold& m, double alpha);

ClassCheck class_check(const AdmissibleManifold& m, const ClassParams& p, double slack = 0.05);

/// Sup distance over the common ball on a grid four times finer than the nodes.
double c0_distance(const AdmissibleManifold& a, const AdmissibleManifold& b);

nlohmann::json manifold_to_json(const AdmissibleManifold& m);
AdmissibleManifold manifold_from_json(const nlohmann::json& j);

}  // namespace ehyp
