#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace ehyp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Spectral norm. Zero for empty matrices.
double spectral_norm(const Mat& m);

/// Smallest singular value over the column space, i.e. min |m v| for unit v.
/// Returns +inf for a matrix without columns.
double min_singular(const Mat& m);

/// Orthonormal basis of the column span (QR); column j keeps the orientation of m.col(j).
Mat orthonormalize(const Mat& m);

/// Cosines of the principal angles between two column spans, descending.
Eigen::VectorXd principal_cosines(const Mat& a, const Mat& b);

/// Minimal principal angle between span(a) and span(b); pi/2 if either is trivial.
double min_angle(const Mat& a, const Mat& b);

/// Sine of the largest principal angle between spans of equal dimension.
double subspace_distance(const Mat& a, const Mat& b);

/// Orthonormal bases of the real invariant subspaces of D for eigenvalues
/// of modulus > 1 (first) and <= 1 (second).
std::pair<Mat, Mat> eigen_splitting(const Mat& D);

/// Deterministic generator: uniform doubles built from raw 64-bit draws so
/// that sequences agree across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return eng_(); }
  /// Uniform point in the closed Euclidean ball of radius r.
  Vec in_ball(int dim, double r);

 private:
  std::mt19937_64 eng_;
};

/// Point i + 1 of the Halton sequence in [0,1)^dim (bases 2,3,5,...).
Vec halton(std::uint64_t i, int dim);

/// Chebyshev points of the second kind on [-r, r], ascending, degree n (n+1 points).
std::vector<double> chebyshev_points(int n, double r);

struct NewtonResult {
  Vec x;
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton for F(x) = target: the step is halved while the residual
/// does not decrease. Converged when |F(x) - target| <= tol.
NewtonResult damped_newton(const std::function<Vec(const Vec&)>& F,
                           const std::function<Mat(const Vec&)>& J, const Vec& target, Vec seed,
                           double tol, int max_iter = 50);

}  // namespace ehyp
