#include "ehyp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ehyp {

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double min_singular(const Mat& m) {
  if (m.cols() == 0) return std::numeric_limits<double>::infinity();
  if (m.rows() < m.cols()) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(m.cols() - 1);
}

Mat orthonormalize(const Mat& m) {
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ() * Mat::Identity(m.rows(), m.cols());
  Mat r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < m.cols(); ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

Eigen::VectorXd principal_cosines(const Mat& a, const Mat& b) {
  if (a.cols() == 0 || b.cols() == 0) return Eigen::VectorXd(0);
  Mat qa = orthonormalize(a), qb = orthonormalize(b);
  Eigen::JacobiSVD<Mat> svd(qa.transpose() * qb);
  return svd.singularValues().cwiseMin(1.0);
}

double min_angle(const Mat& a, const Mat& b) {
  auto c = principal_cosines(a, b);
  if (c.size() == 0) return std::numbers::pi / 2;
  return std::acos(std::clamp(c(0), -1.0, 1.0));
}

double subspace_distance(const Mat& a, const Mat& b) {
  if (a.cols() == 0 && b.cols() == 0) return 0.0;
  if (a.cols() != b.cols()) return 1.0;
  // sin of the largest angle = norm of (I - P_a) Q_b, which stays accurate
  // for nearly equal subspaces where arccos of the cosine would not.
  Mat qa = orthonormalize(a), qb = orthonormalize(b);
  Mat resid = qb - qa * (qa.transpose() * qb);
  return std::min(1.0, spectral_norm(resid));
}

namespace {
Mat eigen_subspace(const Eigen::EigenSolver<Mat>& es, bool expanding) {
  const auto& ev = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  std::vector<Vec> cols;
  for (int i = 0; i < ev.size(); ++i) {
    if ((std::abs(ev(i)) > 1.0) != expanding) continue;
    if (std::abs(ev(i).imag()) <= 1e-12 * std::abs(ev(i))) {
      cols.push_back(vecs.col(i).real());
    } else if (ev(i).imag() > 0) {
      cols.push_back(vecs.col(i).real());
      cols.push_back(vecs.col(i).imag());
    }
  }
  Mat m(ev.size(), static_cast<long>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<long>(j)) = cols[j];
  return orthonormalize(m);
}
}  // namespace

std::pair<Mat, Mat> eigen_splitting(const Mat& D) {
  Eigen::EigenSolver<Mat> es(D);
  return {eigen_subspace(es, true), eigen_subspace(es, false)};
}

Vec Rng::in_ball(int dim, double r) {
  Vec x(dim);
  while (true) {
    for (int i = 0; i < dim; ++i) x(i) = uniform(-1.0, 1.0);
    if (x.squaredNorm() <= 1.0) return r * x;
  }
}

Vec halton(std::uint64_t i, int dim) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  Vec x(dim);
  for (int d = 0; d < dim; ++d) {
    int b = primes[d % 12];
    double f = 1.0, v = 0.0;
    std::uint64_t k = i + 1;
    while (k > 0) {
      f /= b;
      v += f * static_cast<double>(k % b);
      k /= b;
    }
    x(d) = v;
  }
  return x;
}

std::vector<double> chebyshev_points(int n, double r) {
  std::vector<double> x(n + 1);
  if (n == 0) {
    x[0] = 0.0;
    return x;
  }
  for (int j = 0; j <= n; ++j)
    x[j] = -r * std::cos(std::numbers::pi * j / n);
  // exact symmetry and endpoints
  for (int j = 0; j <= n / 2; ++j) {
    double a = 0.5 * (x[n - j] - x[j]);
    x[j] = -a;
    x[n - j] = a;
  }
  if (n % 2 == 0) x[n / 2] = 0.0;
  return x;
}


NewtonResult damped_newton(const std::function<Vec(const Vec&)>& F,
                           const std::function<Mat(const Vec&)>& J, const Vec& target, Vec seed,
                           double tol, int max_iter) {
  NewtonResult out;
  out.x = std::move(seed);
  Vec r = F(out.x) - target;
  out.residual = r.norm();
  for (int it = 0; it < max_iter && out.residual > tol; ++it) {
    out.iterations = it + 1;
    Vec step = J(out.x).partialPivLu().solve(r);
    if (!step.allFinite()) break;
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      Vec trial = out.x - t * step;
      Vec rt = F(trial) - target;
      double nt = rt.norm();
      if (std::isfinite(nt) && nt < out.residual) {
        out.x = std::move(trial);
        r = std::move(rt);
        out.residual = nt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  out.converged = out.residual <= tol;
  return out;
}

}  // namespace ehyp
