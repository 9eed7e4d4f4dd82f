#include "ehyp/admissible.hpp"

#include <algorithm>
#include <cmath>

#include "ehyp/errors.hpp"

namespace ehyp {

int default_degree(int k) { return k <= 1 ? 16 : 8; }

AdmissibleManifold::AdmissibleManifold(int k, int s_dim, double r, int degree, ClassParams p)
    : params(p), k_(k), s_(s_dim), deg_(degree), r_(r) {
  if (k < 1 || s_dim < 0 || degree < 1 || !(r > 0))
    throw PreconditionViolated("invalid manifold shape");
  axis_ = chebyshev_points(deg_, r_);
  weights_.resize(deg_ + 1);
  for (int j = 0; j <= deg_; ++j) weights_[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == deg_) ? 0.5 : 1.0);
  diff_ = Mat::Zero(deg_ + 1, deg_ + 1);
  for (int i = 0; i <= deg_; ++i) {
    double s = 0.0;
    for (int j = 0; j <= deg_; ++j) {
      if (i == j) continue;
      diff_(i, j) = (weights_[j] / weights_[i]) / (axis_[i] - axis_[j]);
      s += diff_(i, j);
    }
    diff_(i, i) = -s;
  }
  std::size_t count = 1;
  for (int d = 0; d < k_; ++d) count *= static_cast<std::size_t>(deg_ + 1);
  values_.assign(count, Vec::Zero(s_));
  derivs_.assign(count, Mat::Zero(s_, k_));
}

AdmissibleManifold AdmissibleManifold::sample(int k, int s_dim, double r, int degree,
                                              const ValueFn& value, const DerivFn& deriv,
                                              ClassParams p) {
  AdmissibleManifold m(k, s_dim, r, degree, p);
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    Vec v = m.node(i);
    m.values_[i] = value(v);
    m.derivs_[i] = deriv(v);
  }
  return m;
}

AdmissibleManifold AdmissibleManifold::zero(int k, int s_dim, double r, int degree, ClassParams p) {
  return AdmissibleManifold(k, s_dim, r, degree, p);
}

Vec AdmissibleManifold::node(std::size_t i) const {
  Vec v(k_);
  for (int d = 0; d < k_; ++d) {
    v(d) = axis_[i % (deg_ + 1)];
    i /= (deg_ + 1);
  }
  return v;
}

void AdmissibleManifold::set_node(std::size_t i, Vec value, Mat deriv) {
  values_.at(i) = std::move(value);
  derivs_.at(i) = std::move(deriv);
}

std::vector<double> AdmissibleManifold::basis(double x) const {
  std::vector<double> b(deg_ + 1, 0.0);
  for (int j = 0; j <= deg_; ++j)
    if (x == axis_[j]) {
      b[j] = 1.0;
      return b;
    }
  double s = 0.0;
  for (int j = 0; j <= deg_; ++j) {
    b[j] = weights_[j] / (x - axis_[j]);
    s += b[j];
  }
  for (double& v : b) v /= s;
  return b;
}

std::vector<double> AdmissibleManifold::basis_deriv(double x) const {
  auto b = basis(x);
  std::vector<double> d(deg_ + 1, 0.0);
  for (int j = 0; j <= deg_; ++j)
    for (int i = 0; i <= deg_; ++i) d[j] += diff_(i, j) * b[i];
  return d;
}

void AdmissibleManifold::check_domain(const Vec& v) const {
  if (v.size() != k_) throw PreconditionViolated("wrong point dimension");
  if (v.norm() > r_ * (1.0 + 1e-12)) throw OutOfDomain("point outside B^u(r)");
}

template <class T>
T AdmissibleManifold::interpolate(const std::vector<T>& data, const Vec& v, const T& zero) const {
  std::vector<std::vector<double>> b(k_);
  for (int d = 0; d < k_; ++d) b[d] = basis(v(d));
  T out = zero;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double w = 1.0;
    std::size_t rem = i;
    for (int d = 0; d < k_ && w != 0.0; ++d) {
      w *= b[d][rem % (deg_ + 1)];
      rem /= (deg_ + 1);
    }
    if (w != 0.0) out += w * data[i];
  }
  return out;
}

Vec AdmissibleManifold::evaluate(const Vec& v) const {
  check_domain(v);
  return evaluate_unchecked(v);
}

Mat AdmissibleManifold::derivative(const Vec& v) const {
  check_domain(v);
  return derivative_unchecked(v);
}

Vec AdmissibleManifold::evaluate_unchecked(const Vec& v) const {
  return interpolate<Vec>(values_, v, Vec::Zero(s_));
}

Mat AdmissibleManifold::derivative_unchecked(const Vec& v) const {
  return interpolate<Mat>(derivs_, v, Mat::Zero(s_, k_));
}

double AdmissibleManifold::consistency_error() const {
  double err = 0.0;
  const std::size_t n1 = static_cast<std::size_t>(deg_ + 1);
  for (std::size_t i = 0; i < node_count(); ++i) {
    std::size_t stride = 1;
    for (int d = 0; d < k_; ++d) {
      std::size_t idx = (i / stride) % n1;
      std::size_t base = i - idx * stride;
      Vec dv = Vec::Zero(s_);
      for (std::size_t j = 0; j < n1; ++j) dv += diff_(idx, j) * values_[base + j * stride];
      err = std::max(err, (dv - derivs_[i].col(d)).norm());
      stride *= n1;
    }
  }
  return err;
}

double holder_seminorm(const AdmissibleManifold& m, double alpha) {
  std::vector<Vec> pts;
  std::vector<Mat> ds;
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    Vec v = m.node(i);
    if (v.norm() > m.r()) continue;
    pts.push_back(v);
    ds.push_back(m.deriv(i));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double dist = (pts[i] - pts[j]).norm();
      best = std::max(best, spectral_norm(ds[i] - ds[j]) / std::pow(dist, alpha));
    }
  // Near-diagonal refinement along each axis from every node.
  const double h = 1e-3 * m.r();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int d = 0; d < m.k(); ++d) {
      Vec y = pts[i];
      y(d) += (y(d) > 0 ? -h : h);
      if (y.norm() > m.r()) continue;
      best = std::max(best, spectral_norm(ds[i] - m.derivative(y)) / std::pow(h, alpha));
    }
  return best;
}

ClassCheck class_check(const AdmissibleManifold& m, const ClassParams& p, double slack) {
  ClassCheck c;
  const Vec zero = Vec::Zero(m.k());
  c.tau_est = m.evaluate(zero).norm();
  c.sigma_est = spectral_norm(m.derivative(zero));
  c.holder_est = holder_seminorm(m, p.alpha);
  for (std::size_t i = 0; i < m.node_count(); ++i)
    if (m.node(i).norm() <= m.r()) c.dpsi_max = std::max(c.dpsi_max, spectral_norm(m.deriv(i)));
  const double f = 1.0 + slack;
  auto fails = [&](const char* what, double est, double bound, double abs_tol) {
    if (est <= bound * f + abs_tol) return false;
    c.violation = what;
    c.magnitude = bound > 0 ? est / bound : est;
    return true;
  };
  if (m.r() < p.r * (1.0 - 1e-12)) {
    c.violation = "domain";
    c.magnitude = p.r / m.r();
    return c;
  }
  if (fails("tau", c.tau_est, p.tau, 1e-12 * m.r())) return c;
  if (fails("sigma", c.sigma_est, p.sigma, 1e-12)) return c;
  if (fails("kappa", c.holder_est, p.kappa, 1e-9)) return c;
  if (fails("slope", c.dpsi_max, p.sigma + p.kappa * std::pow(m.r(), p.alpha), 1e-12)) return c;
  if (p.gamma > 0 && fails("gamma", c.dpsi_max, p.gamma, 1e-12)) return c;
  c.member = true;
  return c;
}

double c0_distance(const AdmissibleManifold& a, const AdmissibleManifold& b) {
  if (a.k() != b.k() || a.s_dim() != b.s_dim()) throw PreconditionViolated("shape mismatch");
  const double r = std::min(a.r(), b.r());
  const int n = 4 * std::max(a.degree(), b.degree());
  const auto ax = chebyshev_points(n, r);
  const int k = a.k();
  std::size_t count = 1;
  for (int d = 0; d < k; ++d) count *= ax.size();
  double best = 0.0;
  Vec v(k);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rem = i;
    for (int d = 0; d < k; ++d) {
      v(d) = ax[rem % ax.size()];
      rem /= ax.size();
    }
    if (v.norm() > r) continue;
    best = std::max(best, (a.evaluate_unchecked(v) - b.evaluate_unchecked(v)).norm());
  }
  return best;
}

nlohmann::json manifold_to_json(const AdmissibleManifold& m) {
  using nlohmann::json;
  json j;
  j["k"] = m.k();
  j["s_dim"] = m.s_dim();
  j["r"] = m.r();
  j["degree"] = m.degree();
  json nodes = json::array(), values = json::array(), derivs = json::array();
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    Vec v = m.node(i);
    nodes.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    const Vec& val = m.value(i);
    values.push_back(std::vector<double>(val.data(), val.data() + val.size()));
    json rows = json::array();
    const Mat& D = m.deriv(i);
    for (int a = 0; a < D.rows(); ++a) {
      std::vector<double> row(D.cols());
      for (int b = 0; b < D.cols(); ++b) row[b] = D(a, b);
      rows.push_back(row);
    }
    derivs.push_back(rows);
  }
  j["nodes"] = nodes;
  j["values"] = values;
  j["derivs"] = derivs;
  const ClassParams& p = m.params;
  j["params"] = {{"r", p.r}, {"tau", p.tau}, {"sigma", p.sigma},
                 {"kappa", p.kappa}, {"gamma", p.gamma}, {"alpha", p.alpha}};
  return j;
}

AdmissibleManifold manifold_from_json(const nlohmann::json& j) {
  ClassParams p;
  const auto& jp = j.at("params");
  p.r = jp.at("r");
  p.tau = jp.at("tau");
  p.sigma = jp.at("sigma");
  p.kappa = jp.at("kappa");
  p.gamma = jp.at("gamma");
  p.alpha = jp.at("alpha");
  AdmissibleManifold m(j.at("k"), j.at("s_dim"), j.at("r"), j.at("degree"), p);
  const auto& nodes = j.at("nodes");
  const auto& values = j.at("values");
  const auto& derivs = j.at("derivs");
  if (nodes.size() != m.node_count() || values.size() != m.node_count() ||
      derivs.size() != m.node_count())
    throw PreconditionViolated("manifold JSON has the wrong number of nodes");
  for (int i = 0; i <= m.deg_; ++i) m.axis_[i] = nodes[i][0].get<double>();
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    std::vector<double> val = values[i];
    Vec v = Eigen::Map<Vec>(val.data(), static_cast<long>(val.size()));
    Mat D(m.s_dim(), m.k());
    for (int a = 0; a < m.s_dim(); ++a)
      for (int b = 0; b < m.k(); ++b) D(a, b) = derivs[i][a][b].get<double>();
    m.set_node(i, v, D);
  }
  return m;
}

}  // namespace ehyp
