#include "ehyp/closing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ehyp/effective.hpp"
#include "ehyp/errors.hpp"
#include "ehyp/graph_transform.hpp"

namespace ehyp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool at_least(double value, double needed) {
  return value >= needed - 1e-12 * std::max(1.0, std::abs(needed));
}
}  // namespace

SegmentData segment_data(const GermSequence& germs, const Splitting& split) {
  SegmentData seg;
  seg.alpha = germs.alpha();
  const Vec zero = Vec::Zero(germs.dim());
  for (long k = germs.n_min(); k <= germs.n_max(); ++k) {
    const SubspacePair& sp = split.at(k);
    Mat D = germs.at(k).jacobian(zero);
    seg.lambda_u.push_back(sp.u_dim() ? std::log(min_singular(D * sp.eu)) : kInf);
    seg.lambda_s.push_back(sp.s_dim() ? std::log(spectral_norm(D * sp.es)) : -kInf);
    seg.theta.push_back(min_angle(sp.eu, sp.es));
  }
  return seg;
}

SegmentReport ceh_check(const SegmentData& seg, const CehRates& rates,
                        std::optional<CehParams> given) {
  const long p = seg.p();
  if (p < 1) throw PreconditionViolated("segment needs at least one iterate");
  SegmentReport rep;
  std::vector<double> pu(p + 1), ps(p + 1);
  for (long k = 0; k <= p; ++k) {
    double delta = 0.0;
    if (std::isfinite(seg.lambda_s[k]))
      delta = std::max(0.0, (seg.lambda_s[k] - seg.lambda_u[k]) / seg.alpha);
    double pen = seg.theta[k] < rates.theta_bar ? rates.L : 0.0;
    pu[k] = seg.lambda_u[k] - delta - pen;
    ps[k] = seg.lambda_s[k] + delta + pen;
  }
  rep.M_u_seq = m_sequence(std::vector<double>(pu.begin(), pu.begin() + p), rates.chi_hat_u);
  rep.M_s_seq.assign(p + 1, 0.0);
  double best = -kInf;  // max over m > n of sum_{k=n}^{m-1} (ps_k - chi_hat_s)
  for (long n = p - 1; n >= 0; --n) {
    best = (ps[n] - rates.chi_hat_s) + std::max(0.0, best);
    rep.M_s_seq[n] = std::max(0.0, best);
  }
  CehParams& mn = rep.minimal;
  mn.M_u = rep.M_u_seq[p];
  mn.M_s = rep.M_s_seq[0];
  rep.used = given ? *given : mn;
  const CehParams& u = rep.used;

  auto hat_u = [&](double M_s) {
    double v = -kInf, tail = 0.0;  // tail = sum_{k=n+1}^{p} (lambda_u_k - chi_hat_u)
    for (long n = p; n >= 1; --n) {
      v = std::max(v, rep.M_s_seq[n] - tail);
      tail += seg.lambda_u[n] - rates.chi_hat_u;
    }
    return std::max(v, M_s - tail);
  };
  auto hat_s = [&](double M_u) {
    double v = -kInf, head = 0.0;  // head = sum_{k=0}^{n-1} (lambda_s_k - chi_hat_s)
    for (long n = 0; n < p; ++n) {
      v = std::max(v, rep.M_u_seq[n] + head);
      head += seg.lambda_s[n] - rates.chi_hat_s;
    }
    return std::max(v, M_u + head);
  };
  mn.M_hat_u = hat_u(u.M_s);
  mn.M_hat_s = hat_s(u.M_u);
  if (!given) {
    rep.used.M_hat_u = mn.M_hat_u;
    rep.used.M_hat_s = mn.M_hat_s;
  }
  rep.mu_ok = at_least(u.M_u, mn.M_u);
  rep.ms_ok = at_least(u.M_s, mn.M_s);
  rep.hmu_ok = at_least(rep.used.M_hat_u, mn.M_hat_u);
  rep.hms_ok = at_least(rep.used.M_hat_s, mn.M_hat_s);
  rep.theta_ok = seg.theta[0] >= rates.theta_bar && seg.theta[p] >= rates.theta_bar;
  const double z = 1e-12;
  rep.zero_feasible = mn.M_u <= z && mn.M_s <= z && mn.M_hat_u <= z && mn.M_hat_s <= z;
  rep.verdict = rep.mu_ok && rep.ms_ok && rep.hmu_ok && rep.hms_ok && rep.theta_ok;
  return rep;
}

Vec torus_diff(const Vec& a, const Vec& b, bool torus) {
  Vec d = a - b;
  if (torus) d -= d.array().round().matrix();
  return d;
}

Splitting orbit_splitting(const Germ::Fn& f, const Germ::JacFn& jac,
                          const std::vector<Vec>& points) {
  const long p = static_cast<long>(points.size()) - 1;
  std::vector<Mat> D;
  Mat P = Mat::Identity(points[0].size(), points[0].size());
  for (long k = 0; k < p; ++k) {
    D.push_back(jac ? jac(points[k]) : fd_jacobian(f, points[k]));
    P = D.back() * P;
  }
  auto [eu, es] = eigen_splitting(P);
  std::vector<SubspacePair> pairs(p + 1);
  pairs[0].eu = eu;
  for (long k = 0; k < p; ++k) pairs[k + 1].eu = orthonormalize(D[k] * pairs[k].eu);
  pairs[p].es = es;
  for (long k = p - 1; k >= 0; --k)
    pairs[k].es = orthonormalize(D[k].partialPivLu().solve(pairs[k + 1].es));
  return Splitting(0, std::move(pairs));
}

ClosingResult close_orbit(const OrbitSegment& seg, const ClosingOptions& opt) {
  const long p = seg.p();
  if (p < 1) throw PreconditionViolated("orbit segment needs p >= 1");
  if (!seg.split.contains(0) || !seg.split.contains(p - 1))
    throw PreconditionViolated("splitting must cover the orbit points");
  const SubspacePair& sp0 = seg.split.at(0);
  const int ku = sp0.u_dim(), ks = sp0.s_dim();
  if (ku < 1 || ks < 1) throw PreconditionViolated("closing needs nontrivial E^u and E^s");
  const int degree = opt.degree > 0 ? opt.degree : default_degree(std::max(ku, ks));

  for (long k = 0; k + 1 < p; ++k) {
    Vec gap = torus_diff(seg.f(seg.points[k]), seg.points[k + 1], seg.torus);
    if (gap.norm() > 1e-9 * std::max(1.0, seg.points[k + 1].norm()))
      throw OrbitMismatch(k, "points do not form an orbit at k = " + std::to_string(k));
  }
  {
    Vec gap = torus_diff(seg.f(seg.points[p - 1]), seg.points[0], seg.torus);
    if (opt.epsilon > 0 && gap.norm() >= opt.epsilon)
      throw PreconditionViolated("segment does not return within epsilon");
  }

  // Step maps in split coordinates; the last one lands in the chart at x_0.
  std::vector<CoordMap> steps;
  for (long k = 0; k < p; ++k) {
    const Vec xk = seg.points[k];
    const Vec target = (k + 1 == p) ? seg.points[0] : seg.points[k + 1];
    Vec shift = Vec::Zero(seg.dim);
    if (seg.torus) shift = (seg.f(xk) - target).array().round().matrix();
    Vec offset = target + shift;
    auto f = seg.f;
    auto jac = seg.jac;
    Germ::Fn fk = [f, xk, offset](const Vec& v) { return Vec(f(xk + v) - offset); };
    Germ::JacFn jk;
    if (jac) jk = [jac, xk](const Vec& v) { return jac(xk + v); };
    const SubspacePair& to = (k + 1 == p) ? sp0 : seg.split.at(k + 1);
    steps.push_back(split_map(fk, jk, seg.split.at(k), to));
  }

  ClosingResult out;
  // Graphs contract towards the fixed graph at the linear rate e^{lambda_s - lambda_u}.
  double log_q = 0.0;
  for (long k = 0; k < p; ++k) {
    const SubspacePair& sp = seg.split.at(k);
    Mat D = seg.jac ? seg.jac(seg.points[k]) : fd_jacobian(seg.f, seg.points[k]);
    log_q += std::log(spectral_norm(D * sp.es)) - std::log(min_singular(D * sp.eu));
  }
  out.predicted_ratio = std::exp(log_q);

  TransformOptions topt;
  topt.check_class = false;
  topt.degree = degree;
  auto iterate = [&](auto&& one_period, std::vector<double>& changes, AdmissibleManifold g) {
    int limit = opt.max_periods;
    for (int it = 0; it < limit; ++it) {
      AdmissibleManifold next = one_period(g);
      double ch = c0_distance(next, g);
      changes.push_back(ch);
      g = std::move(next);
      if (ch < opt.tol) return g;
      if (changes.size() == 1 && out.predicted_ratio < 1.0 && ch > 0) {
        int pred = static_cast<int>(
            std::ceil(std::log(opt.tol / ch) / std::log(out.predicted_ratio)));
        limit = std::min(limit, 1 + 3 * std::max(pred, 1) + 2);
      }
    }
    std::ostringstream os;
    os << "graph iteration did not contract: last change " << changes.back() << " after "
       << changes.size() << " periods";
    throw ContractionFail(os.str());
  };

  ClassParams cp{opt.r, 0, 0, 0, 0, 1.0};
  AdmissibleManifold psi = iterate(
      [&](AdmissibleManifold g) {
        for (long k = 0; k < p; ++k) g = transform_step(steps[k], g, opt.r, cp, topt).manifold;
        return g;
      },
      out.u_changes, AdmissibleManifold::zero(ku, ks, opt.r, degree, cp));

  std::vector<CoordMap> back;
  for (long k = 0; k < p; ++k) back.push_back(swap_inverse(steps[k]));
  AdmissibleManifold phi = iterate(
      [&](AdmissibleManifold g) {
        for (long k = p - 1; k >= 0; --k) g = transform_step(back[k], g, opt.r, cp, topt).manifold;
        return g;
      },
      out.s_changes, AdmissibleManifold::zero(ks, ku, opt.r, degree, cp));

  // Intersection of graph psi (over E^u) and graph phi (over E^s).
  auto F = [&](const Vec& q) {
    Vec v = q.head(ku), w = q.tail(ks);
    Vec r(ku + ks);
    r << v - phi.evaluate_unchecked(w), w - psi.evaluate_unchecked(v);
    return r;
  };
  auto J = [&](const Vec& q) {
    Vec v = q.head(ku), w = q.tail(ks);
    Mat m = Mat::Identity(ku + ks, ku + ks);
    m.topRightCorner(ku, ks) = -phi.derivative_unchecked(w);
    m.bottomLeftCorner(ks, ku) = -psi.derivative_unchecked(v);
    return m;
  };
  NewtonResult nr = damped_newton(F, J, Vec::Zero(ku + ks), Vec::Zero(ku + ks), 1e-15 * opt.r);
  if (nr.residual > 1e-12 * opt.r || nr.x.head(ku).norm() > opt.r || nr.x.tail(ks).norm() > opt.r)
    throw IntersectionFail("fixed graphs do not intersect inside the chart");
  Vec z = seg.points[0] + sp0.basis() * nr.x;

  // Newton on f^p z = z (up to a lattice translation on the torus).
  auto period = [&](const Vec& y, Mat* D) {
    Vec x = y;
    if (D) *D = Mat::Identity(seg.dim, seg.dim);
    for (long k = 0; k < p; ++k) {
      if (D) *D = (seg.jac ? seg.jac(x) : fd_jacobian(seg.f, x)) * *D;
      x = seg.f(x);
    }
    return x;
  };
  Vec shift = Vec::Zero(seg.dim);
  if (seg.torus) shift = (period(z, nullptr) - z).array().round().matrix();
  for (int it = 0; it < 30; ++it) {
    Mat D;
    Vec G = period(z, &D) - z - shift;
    double res = G.norm();
    out.newton_residuals.push_back(res);
    if (res <= 1e-15 * std::max(1.0, z.norm())) break;
    if (it > 0 && res >= out.newton_residuals[it - 1]) break;
    z -= (D - Mat::Identity(seg.dim, seg.dim)).partialPivLu().solve(G);
  }
  out.z = z;
  out.residual = torus_diff(period(z, nullptr), z, seg.torus).norm();
  out.distance_to_x = torus_diff(z, seg.points[0], seg.torus).norm();

  Mat D;
  period(z, &D);
  out.eigenvalues = Eigen::EigenSolver<Mat>(D, false).eigenvalues();
  out.hyperbolic = true;
  for (int i = 0; i < out.eigenvalues.size(); ++i)
    if (std::abs(std::abs(out.eigenvalues(i)) - 1.0) <= opt.hyperbolic_margin) out.hyperbolic = false;
  auto [eu, esb] = eigen_splitting(D);
  out.dist_u = eu.cols() == sp0.u_dim() ? subspace_distance(eu, sp0.eu) : 1.0;
  out.dist_s = esb.cols() == sp0.s_dim() ? subspace_distance(esb, sp0.es) : 1.0;
  return out;
}

}  // namespace ehyp
