#include "ehyp/graph_transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ehyp/errors.hpp"

namespace ehyp {

ClassParams class_at(const ParamSeq& params, long n) {
  const ParamStep& s = params.at(n);
  return ClassParams{s.r, s.tau, s.sigma, s.kappa, s.gamma, params.alpha};
}

namespace {

Vec stack(const Vec& a, const Vec& b) {
  Vec z(a.size() + b.size());
  z << a, b;
  return z;
}

Mat graph_tangent(const Mat& dpsi) {
  const long k = dpsi.cols(), s = dpsi.rows();
  Mat T(k + s, k);
  T << Mat::Identity(k, k), dpsi;
  return T;
}

// Probe points on [-r, r]^k inside the ball, off the degree-n nodes.
std::vector<Vec> probes(int k, double r, int degree) {
  const int n = 2 * degree + 1;
  auto ax = chebyshev_points(n, r);
  std::size_t count = 1;
  for (int d = 0; d < k; ++d) count *= ax.size();
  std::vector<Vec> out;
  Vec v(k);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rem = i;
    for (int d = 0; d < k; ++d) {
      v(d) = ax[rem % ax.size()];
      rem /= ax.size();
    }
    if (v.norm() <= r) out.push_back(v);
  }
  return out;
}

}  // namespace

GraphPoint graph_image_at(const CoordMap& map, const AdmissibleManifold& in, const Vec& v_bar,
                          double scale, const TransformOptions& opt) {
  const int a = map.a_dim;
  auto phi = [&](const Vec& v) { return Vec(map.apply(stack(v, in.evaluate_unchecked(v))).head(a)); };
  auto jphi = [&](const Vec& v) {
    Mat J = map.jacobian(stack(v, in.evaluate_unchecked(v)));
    return Mat(J.topRows(a) * graph_tangent(in.derivative_unchecked(v)));
  };
  const Vec zero = Vec::Zero(a);
  Vec seed = jphi(zero).partialPivLu().solve(v_bar - phi(zero));
  const double tol = opt.newton_tol * std::max({scale, v_bar.norm(), 1e-300});
  NewtonResult res = damped_newton(phi, jphi, v_bar, seed, tol, opt.max_newton);
  if (!res.converged) {
    std::ostringstream os;
    os << "graph transform Newton stalled at residual " << res.residual << " after "
       << res.iterations << " iterations";
    throw NewtonFail(os.str());
  }
  GraphPoint gp;
  gp.preimage = res.x;
  gp.iterations = res.iterations;
  gp.residual = res.residual;
  Vec z = stack(res.x, in.evaluate_unchecked(res.x));
  gp.value = map.apply(z).tail(map.b_dim);
  Mat J = map.jacobian(z);
  Mat T = graph_tangent(in.derivative_unchecked(res.x));
  Mat top = J.topRows(a) * T;
  Mat bottom = J.bottomRows(map.b_dim) * T;
  gp.deriv = top.transpose().partialPivLu().solve(bottom.transpose()).transpose();
  return gp;
}

TransformResult transform_step(const CoordMap& map, const AdmissibleManifold& in, double r_out,
                               const ClassParams& out_class, const TransformOptions& opt) {
  if (map.a_dim != in.k() || map.b_dim != in.s_dim())
    throw PreconditionViolated("manifold shape does not match the map");
  const int degree = opt.degree > 0 ? opt.degree : in.degree();
  TransformResult res{AdmissibleManifold(in.k(), in.s_dim(), r_out, degree, out_class), {}};
  TransformStepReport& rep = res.report;
  long in_ball = 0, covered = 0;
  for (std::size_t i = 0; i < res.manifold.node_count(); ++i) {
    Vec vb = res.manifold.node(i);
    GraphPoint gp = graph_image_at(map, in, vb, r_out, opt);
    rep.newton_max_iter = std::max(rep.newton_max_iter, gp.iterations);
    rep.newton_max_residual = std::max(rep.newton_max_residual, gp.residual);
    if (vb.norm() <= r_out) {
      ++in_ball;
      if (gp.preimage.norm() <= in.r() * (1.0 + 1e-12)) ++covered;
    }
    res.manifold.set_node(i, gp.value, gp.deriv);
  }
  rep.domain_coverage = in_ball ? static_cast<double>(covered) / in_ball : 1.0;
  if (covered < in_ball) {
    std::ostringstream os;
    os << "image of the input graph covers only " << rep.domain_coverage
       << " of the output nodes";
    throw CoverageFail(os.str());
  }
  if (opt.check_class) {
    ClassCheck cc = class_check(res.manifold, out_class, opt.class_slack);
    rep.class_ok = cc.member;
    rep.class_violation = cc.violation;
    rep.class_magnitude = cc.magnitude;
    if (!cc.member && opt.strict_class)
      throw ClassEscape("transformed graph violates " + cc.violation + " (ratio " +
                        std::to_string(cc.magnitude) + ")");
  }
  return res;
}

TransformResult transform(const GermSequence& seq, const Splitting& split, const ParamSeq& params,
                          long n, const AdmissibleManifold& in, const TransformOptions& opt) {
  CoordMap map = nonlinear_split(seq.at(n), split.at(n), split.at(n + 1));
  auto res = transform_step(map, in, params.at(n + 1).r, class_at(params, n + 1), opt);
  res.report.n = n;
  return res;
}

double invariance_error(const CoordMap& map, const AdmissibleManifold& here,
                        const AdmissibleManifold& next) {
  double err = 0.0;
  const int a = map.a_dim;
  for (const Vec& v : probes(here.k(), here.r(), here.degree())) {
    Vec img = map.apply(stack(v, here.evaluate(v)));
    Vec va = img.head(a);
    if (va.norm() > next.r()) continue;
    err = std::max(err, (img.tail(map.b_dim) - next.evaluate(va)).norm());
  }
  return err;
}

double transform_residual(const CoordMap& map, const AdmissibleManifold& here,
                          const AdmissibleManifold& next, const TransformOptions& opt) {
  double err = 0.0;
  for (const Vec& vb : probes(next.k(), next.r(), next.degree())) {
    GraphPoint gp = graph_image_at(map, here, vb, next.r(), opt);
    if (gp.preimage.norm() > here.r() * (1.0 + 1e-12)) continue;
    err = std::max(err, (gp.value - next.evaluate(vb)).norm());
  }
  return err;
}

PushResult push(const GermSequence& seq, const Splitting& split, const ParamSeq& params,
                const AdmissibleManifold& start, long from, long to, const TransformOptions& opt) {
  PushResult out;
  out.from = from;
  out.manifolds.push_back(start);
  for (long n = from; n < to; ++n) {
    CoordMap map = nonlinear_split(seq.at(n), split.at(n), split.at(n + 1));
    auto res = transform_step(map, out.manifolds.back(), params.at(n + 1).r,
                              class_at(params, n + 1), opt);
    res.report.n = n;
    out.invariance_error =
        std::max(out.invariance_error, invariance_error(map, out.manifolds.back(), res.manifold));
    out.manifolds.push_back(std::move(res.manifold));
    out.reports.push_back(res.report);
  }
  return out;
}

ExpansionReport check_expansion(const GermSequence& seq, const Splitting& split,
                                const PushResult& family, long m, long n, double bound, int pairs,
                                std::uint64_t seed) {
  ExpansionReport rep;
  rep.bound = bound;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  std::vector<CoordMap> maps;
  for (long k = m; k < n; ++k) maps.push_back(nonlinear_split(seq.at(k), split.at(k), split.at(k + 1)));
  const AdmissibleManifold& psi = family.at(m);
  const Mat Bm = split.at(m).basis(), Bn = split.at(n).basis();
  const int a = psi.k();
  Rng rng(seed);
  auto run = [&](Vec z) -> std::optional<Vec> {
    for (long k = m; k < n; ++k) {
      z = maps[k - m].apply(z);
      if (z.head(a).norm() > family.at(k + 1).r()) return std::nullopt;
    }
    return z;
  };
  for (long attempt = 0; rep.pairs_used < pairs && attempt < 50L * pairs; ++attempt) {
    Vec v1 = rng.in_ball(a, psi.r());
    Vec v2;
    if (attempt % 2 == 0) {
      v2 = rng.in_ball(a, psi.r());
    } else {
      Vec dir = rng.in_ball(a, 1.0);
      if (dir.norm() == 0.0) continue;
      v2 = v1 + psi.r() * std::pow(10.0, -1.0 - 5.0 * rng.uniform()) * dir.normalized();
      if (v2.norm() > psi.r()) continue;
    }
    Vec z1 = stack(v1, psi.evaluate(v1)), z2 = stack(v2, psi.evaluate(v2));
    double d0 = (Bm * (z1 - z2)).norm();
    if (d0 == 0.0) continue;
    auto y1 = run(z1), y2 = run(z2);
    if (!y1 || !y2) continue;
    double ratio = (Bn * (*y1 - *y2)).norm() / d0;
    ++rep.pairs_used;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    if (ratio < bound * (1.0 - 1e-12)) ++rep.violations;
  }
  return rep;
}

AttractionReport check_attraction(const GermSequence& seq, const Splitting& split,
                                  const PushResult& family, long m, const Vec& v, const Vec& w,
                                  long steps, const std::vector<double>& log_bounds) {
  AttractionReport rep;
  Vec z = stack(v, w);
  const int a = static_cast<int>(v.size());
  auto offset = [&](long k, const Vec& zz) {
    const AdmissibleManifold& psi = family.at(k);
    Vec va = zz.head(a);
    if (va.norm() > psi.r()) throw DomainExit(k, "orbit left the graph domain at " + std::to_string(k));
    return (zz.tail(zz.size() - a) - psi.evaluate(va)).norm();
  };
  double off = offset(m, z);
  for (long k = m; k < m + steps; ++k) {
    if (off <= 1e-10 * family.at(k).r()) break;
    z = nonlinear_split(seq.at(k), split.at(k), split.at(k + 1)).apply(z);
    double next = offset(k + 1, z);
    double ratio = next / off;
    double bound = std::exp(log_bounds.at(k - m));
    rep.ratios.push_back(ratio);
    rep.bounds.push_back(bound);
    if (ratio > bound * (1.0 + 1e-12)) ++rep.violations;
    off = next;
  }
  return rep;
}

UnstableResult unstable_solve(const GermSequence& seq, const Splitting& split,
                              const ParamSeq& params, const UnstableOptions& opt) {
  UnstableResult out;
  const long lowest = std::max({seq.n_min(), split.n_min(), params.n_min});
  if (seq.n_max() < -1 || params.n_max() < 0 || !split.contains(0))
    throw PreconditionViolated("unstable_solve needs germs up to index -1");
  const int k_dim = split.at(0).u_dim(), s_dim = split.at(0).s_dim();
  TransformOptions topt = opt.transform;
  const int degree = topt.degree > 0 ? topt.degree : default_degree(k_dim);
  topt.degree = degree;
  std::optional<AdmissibleManifold> prev;
  double last_change = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= opt.k_max && -k >= lowest; k *= 2) {
    ClassParams cp = class_at(params, -k);
    auto start = AdmissibleManifold::zero(k_dim, s_dim, cp.r, degree, cp);
    out.family = push(seq, split, params, start, -k, 0, topt);
    out.K = k;
    const AdmissibleManifold& psi0 = out.family.at(0);
    if (prev) {
      last_change = c0_distance(*prev, psi0);
      out.history.emplace_back(k, last_change);
      if (last_change < opt.tol) {
        out.converged = true;
        break;
      }
    }
    prev = psi0;
  }
  out.invariance_error = out.family.invariance_error;
  for (long n = -out.K; n < 0; ++n) {
    CoordMap map = nonlinear_split(seq.at(n), split.at(n), split.at(n + 1));
    out.c0_residual = std::max(
        out.c0_residual, transform_residual(map, out.family.at(n), out.family.at(n + 1), topt));
  }
  if (!out.converged) {
    std::ostringstream os;
    os << "unstable manifold did not converge; last change " << last_change << " at k = "
       << out.K;
    throw NoConvergence(os.str());
  }
  return out;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Member: return "member";
    case Verdict::NonMember: return "non-member";
    default: return "inconclusive";
  }
}

CharacterizationReport check_characterization(const GermSequence& seq, const Splitting& split,
                                              const AdmissibleManifold& psi0, const Vec& x,
                                              double C, double chi_bar_u, long window) {
  CharacterizationReport rep;
  rep.backward_ok = x.norm() <= C;
  Vec y = x;
  for (long m = -1; m >= -window && rep.backward_ok; --m) {
    const Germ& g = seq.at(m);
    y = g.inverse(y);
    if (!g.in_domain(y)) throw DomainExit(m, "backward orbit left the domain");
    ++rep.steps_checked;
    if (y.norm() > C * std::exp(m * chi_bar_u) * (1.0 + 1e-12)) rep.backward_ok = false;
  }
  Vec z = split.at(0).basis().partialPivLu().solve(x);
  const int a = psi0.k();
  Vec v = z.head(a);
  bool vertical_known = v.norm() <= psi0.r();
  if (vertical_known) rep.vertical_distance = (z.tail(z.size() - a) - psi0.evaluate(v)).norm();
  const double scale = std::max(psi0.r(), 1e-300);
  if (vertical_known && rep.backward_ok && rep.vertical_distance <= 1e-8 * scale)
    rep.verdict = Verdict::Member;
  else if (!rep.backward_ok && (!vertical_known || rep.vertical_distance > 1e-6 * scale))
    rep.verdict = Verdict::NonMember;
  else
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

}  // namespace ehyp
