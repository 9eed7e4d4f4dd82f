#pragma once

#include <optional>
#include <vector>

#include "ehyp/admissible.hpp"
#include "ehyp/germ.hpp"

namespace ehyp {

/// Linear data at the points x, f x, ..., f^p x of an orbit segment.
struct SegmentData {
  double alpha = 1.0;
  std::vector<double> lambda_u, lambda_s, theta;  ///< k = 0..p
  long p() const { return static_cast<long>(lambda_u.size()) - 1; }
};

/// Rates from germs at the p+1 orbit points and the splitting there.
SegmentData segment_data(const GermSequence& germs, const Splitting& split);

struct CehRates {
  double chi_hat_u = 0, chi_hat_s = 0, theta_bar = 0, L = 0;
};

struct CehParams {
  double M_s = 0, M_u = 0, M_hat_s = 0, M_hat_u = 0;
};

struct SegmentReport {
  std::vector<double> M_u_seq, M_s_seq;  ///< n = 0..p
  CehParams minimal;  ///< least values satisfying the M inequalities
  CehParams used;     ///< values the verdict refers to
  bool ms_ok = false, mu_ok = false, hmu_ok = false, hms_ok = false, theta_ok = false;
  bool zero_feasible = false;  ///< all minimal values are <= 0
  bool verdict = false;
};

/// Checks whether x is (chi_hat, theta_bar, M)-effectively hyperbolic along
/// p iterates. Without `given` the minimal parameters are used.
SegmentReport ceh_check(const SegmentData& seg, const CehRates& rates,
                        std::optional<CehParams> given = std::nullopt);

/// A map of R^d (or of the torus R^d / Z^d when `torus`) with an orbit
/// segment x_0..x_p and a splitting at those points.
struct OrbitSegment {
  int dim = 0;
  Germ::Fn f;
  Germ::JacFn jac;
  bool torus = false;
  std::vector<Vec> points;
  Splitting split;  ///< indices 0..p
  long p() const { return static_cast<long>(points.size()) - 1; }
};

/// Splitting along x_0..x_p from the eigenspaces of Df^p(x_0), carried
/// forward (E^u) and backward from x_p (E^s) by Df.
Splitting orbit_splitting(const Germ::Fn& f, const Germ::JacFn& jac,
                          const std::vector<Vec>& points);

struct ClosingOptions {
  double r = 0.1;          ///< radius of the graphs in both directions
  int degree = 0;          ///< 0 selects the default for the dimension
  double tol = 1e-10;      ///< C0 change that stops the graph iteration
  int max_periods = 200;
  double hyperbolic_margin = 1e-6;
  double epsilon = 0.0;    ///< if > 0, require |f^p x - x| < epsilon
};

struct ClosingResult {
  Vec z;
  double residual = 0;
  std::vector<double> newton_residuals;
  std::vector<double> u_changes, s_changes;  ///< C0 change per period
  double predicted_ratio = 0;  ///< expected contraction of the changes per period
  Eigen::VectorXcd eigenvalues;
  bool hyperbolic = false;
  double dist_u = 0, dist_s = 0;  ///< distance of the eigenspaces from the splitting at x
  double distance_to_x = 0;
};

/// Periodic point near x_0: fixed graphs of the period map in both
/// directions, their intersection, then Newton on f^p z = z.
ClosingResult close_orbit(const OrbitSegment& seg, const ClosingOptions& opt = {});

/// Difference a - b, reduced to the nearest lattice representative on the torus.
Vec torus_diff(const Vec& a, const Vec& b, bool torus);

}  // namespace ehyp
