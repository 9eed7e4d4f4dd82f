#include "ehyp/germ.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "ehyp/errors.hpp"

namespace ehyp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool Box::contains(const Vec& x) const {
  if (lo.size() == 0) return true;
  for (int i = 0; i < x.size(); ++i)
    if (!(x(i) >= lo(i) && x(i) <= hi(i))) return false;
  return true;
}

Box Box::cube(int dim, double half_width) {
  return Box{Vec::Constant(dim, -half_width), Vec::Constant(dim, half_width)};
}

Mat fd_jacobian(const Germ::Fn& f, const Vec& x) {
  const double h = 1e-6 * std::max(1.0, x.norm());
  const int d = static_cast<int>(x.size());
  Vec f0 = f(x);
  Mat J(f0.size(), d);
  Vec xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    J.col(j) = (f(xp) - f(xm)) / (2 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

Germ::Germ(int dim, Fn f, JacFn jac, Box domain, Fn inverse, std::optional<double> holder_hint) {
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->f = std::move(f);
  impl->jac = std::move(jac);
  impl->domain = std::move(domain);
  impl->inv = std::move(inverse);
  impl->holder_hint = holder_hint;
  impl_ = std::move(impl);
}

Mat Germ::jacobian(const Vec& x) const {
  if (impl_->jac) return impl_->jac(x);
  return fd_jacobian(impl_->f, x);
}

Vec Germ::inverse(const Vec& y, const Vec* seed) const {
  if (impl_->inv) return impl_->inv(y);
  Vec x0 = seed ? *seed : Vec(jacobian(Vec::Zero(dim())).partialPivLu().solve(y));
  double tol = 1e-14 * std::max(1.0, y.norm());
  auto res = damped_newton([this](const Vec& x) { return (*this)(x); },
                           [this](const Vec& x) { return jacobian(x); }, y, x0, tol);
  if (!res.converged && res.residual > 1e-11 * std::max(1.0, y.norm()))
    throw NewtonFail("germ inverse did not converge, residual " + std::to_string(res.residual));
  return res.x;
}

Germ Germ::centered(double tol) const {
  Vec f0 = (*this)(Vec::Zero(dim()));
  double off = f0.norm();
  if (off == 0.0) return *this;
  if (off > tol) {
    std::ostringstream os;
    os << "germ moves the origin by " << off << " (limit " << tol << ")";
    throw PreconditionViolated(os.str());
  }
  auto src = impl_;
  Fn f = [src, f0](const Vec& x) { return Vec(src->f(x) - f0); };
  JacFn jac;
  if (src->jac) jac = src->jac;
  else jac = [src](const Vec& x) { return fd_jacobian(src->f, x); };
  Fn inv;
  if (src->inv) inv = [src, f0](const Vec& y) { return src->inv(y + f0); };
  return Germ(src->dim, f, jac, src->domain, inv, src->holder_hint);
}

GermSequence::GermSequence(long n_min, std::vector<Germ> germs, double alpha)
    : n_min_(n_min), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw PreconditionViolated("alpha must lie in (0,1]");
  germs_.reserve(germs.size());
  std::map<const void*, Germ> done;
  for (std::size_t i = 0; i < germs.size(); ++i) {
    const Germ& g = germs[i];
    auto it = done.find(g.id());
    if (it != done.end()) {
      germs_.push_back(it->second);
      if (it->second.id() != g.id()) recentred_.push_back(n_min + static_cast<long>(i));
      continue;
    }
    Germ c = g.centered();
    if (c.id() != g.id()) recentred_.push_back(n_min + static_cast<long>(i));
    done.emplace(g.id(), c);
    germs_.push_back(c);
  }
}

const Germ& GermSequence::at(long n) const {
  if (!contains(n)) throw std::out_of_range("germ index " + std::to_string(n) + " out of range");
  return germs_[n - n_min_];
}

GermSequence GermSequence::slice(long lo, long hi) const {
  std::vector<Germ> g;
  for (long n = lo; n <= hi; ++n) g.push_back(at(n));
  return GermSequence(lo, std::move(g), alpha_);
}

Mat SubspacePair::basis() const {
  Mat b(eu.rows(), eu.cols() + es.cols());
  b << eu, es;
  return b;
}

Splitting::Splitting(long n_min, std::vector<SubspacePair> pairs)
    : n_min_(n_min), pairs_(std::move(pairs)) {
  for (auto& p : pairs_) {
    p.eu = orthonormalize(p.eu);
    p.es = orthonormalize(p.es);
  }
}

Splitting Splitting::constant(const SubspacePair& p, long n_min, long n_max) {
  return Splitting(n_min, std::vector<SubspacePair>(n_max - n_min + 1, p));
}

const SubspacePair& Splitting::at(long n) const {
  if (!contains(n))
    throw std::out_of_range("splitting index " + std::to_string(n) + " out of range");
  return pairs_[n - n_min_];
}

HolderEstimate holder_estimate(const Germ& g, double alpha, double r, int samples) {
  const int d = g.dim();
  std::vector<Vec> pts;
  std::vector<Mat> jacs;
  pts.reserve(samples);
  // Partners of each base point along the axes and the diagonal, at two scales.
  std::vector<Vec> dirs;
  for (int i = 0; i < d; ++i) dirs.push_back(Vec::Unit(d, i));
  dirs.push_back(Vec::Ones(d) / std::sqrt(static_cast<double>(d)));
  const double scales[] = {r / 16, r / 128};

  std::vector<double> running;  // certified value after k base points
  double best = 0.0;
  auto ratio = [alpha](const Mat& a, const Mat& b, const Vec& x, const Vec& y) {
    double dist = (x - y).norm();
    if (dist == 0.0) return 0.0;
    return spectral_norm(a - b) / std::pow(dist, alpha);
  };
  for (std::uint64_t i = 0; static_cast<int>(pts.size()) < samples && i < 64ull * samples; ++i) {
    Vec x = r * (2.0 * halton(i, d) - Vec::Ones(d));
    if (x.norm() > r) continue;
    Mat jx = g.jacobian(x);
    for (std::size_t j = 0; j < pts.size(); ++j) best = std::max(best, ratio(jx, jacs[j], x, pts[j]));
    for (double s : scales)
      for (const Vec& dir : dirs) {
        Vec y = x + s * dir;
        if (y.norm() > r) y = x - s * dir;
        if (y.norm() > r) continue;
        best = std::max(best, ratio(jx, g.jacobian(y), x, y));
      }
    pts.push_back(x);
    jacs.push_back(jx);
    running.push_back(best);
  }
  HolderEstimate out;
  out.certified = best;
  out.extrapolated = best;
  std::size_t n = running.size();
  if (n >= 8) {
    double e1 = running[n / 4 - 1], e2 = running[n / 2 - 1], e3 = running[n - 1];
    double d1 = e2 - e1, d2 = e3 - e2;
    if (d2 > 0 && d1 > d2) out.extrapolated = e3 + d2 * d2 / (d1 - d2);
    else out.extrapolated = e3 + d2;
    out.extrapolated = std::min(out.extrapolated, 2.0 * e3);
  }
  return out;
}

LinearData extract_linear_data(const GermSequence& seq, const Splitting& split,
                               const LinearOptions& opt) {
  if (!split.contains(seq.n_min()) || !split.contains(seq.n_max() + 1))
    throw PreconditionViolated("splitting must cover [n_min, n_max + 1]");
  LinearData lin;
  lin.n_min = seq.n_min();
  lin.alpha = seq.alpha();
  lin.steps.resize(seq.size());
  std::map<const void*, HolderEstimate> cache;
  const Vec zero = Vec::Zero(seq.dim());
  for (long n = seq.n_min(); n <= seq.n_max(); ++n) {
    const Germ& g = seq.at(n);
    const SubspacePair& here = split.at(n);
    const SubspacePair& next = split.at(n + 1);
    LinearStep& st = lin.steps[n - seq.n_min()];
    Mat D = g.jacobian(zero);
    st.lambda_u = here.u_dim() ? std::log(min_singular(D * here.eu)) : kInf;
    st.lambda_s = here.s_dim() ? std::log(spectral_norm(D * here.es)) : -kInf;
    st.theta = min_angle(here.eu, here.es);
    st.theta_next = min_angle(next.eu, next.es);
    if (auto hint = g.holder_hint()) {
      st.holder = *hint;
    } else {
      auto it = cache.find(g.id());
      if (it == cache.end())
        it = cache.emplace(g.id(), holder_estimate(g, seq.alpha(), opt.holder_radius,
                                                   opt.holder_samples)).first;
      st.holder = opt.use_extrapolated ? it->second.extrapolated : it->second.certified;
    }
    st.beta = std::max(1.0, st.holder) / std::sin(st.theta_next);
  }
  lin.L = bound_L(lin);
  return lin;
}

double bound_L(const LinearData& lin) {
  double L = 0.0;
  for (std::size_t i = 0; i < lin.steps.size(); ++i) {
    const auto& s = lin.steps[i];
    if (std::isfinite(s.lambda_u)) L = std::max(L, std::abs(s.lambda_u));
    if (std::isfinite(s.lambda_s)) L = std::max(L, std::abs(s.lambda_s));
    if (i + 1 < lin.steps.size()) L = std::max(L, std::log(lin.steps[i + 1].beta / s.beta));
  }
  return L;
}

Vec compose(const GermSequence& seq, long m, long n, const Vec& x) {
  Vec y = x;
  for (long k = m; k < n; ++k) {
    const Germ& g = seq.at(k);
    if (!g.in_domain(y)) throw DomainExit(k, "orbit left the domain of f_" + std::to_string(k));
    y = g(y);
  }
  return y;
}

Mat compose_jacobian(const GermSequence& seq, long m, long n, const Vec& x) {
  Vec y = x;
  Mat J = Mat::Identity(x.size(), x.size());
  for (long k = m; k < n; ++k) {
    const Germ& g = seq.at(k);
    if (!g.in_domain(y)) throw DomainExit(k, "orbit left the domain of f_" + std::to_string(k));
    J = g.jacobian(y) * J;
    y = g(y);
  }
  return J;
}

namespace {

double angle_to_center(const Mat& sub, const Mat& center) {
  return std::asin(std::clamp(subspace_distance(sub, center), 0.0, 1.0));
}

}  // namespace

Splitting cones_to_splitting(const GermSequence& seq, const ConeField& cones, int window) {
  const long lo = seq.n_min(), hi = seq.n_max() + 1;
  if (cones.n_min > lo || cones.n_max() < hi)
    throw PreconditionViolated("cone field must cover [n_min, n_max + 1]");
  const Vec zero = Vec::Zero(seq.dim());
  std::vector<Mat> D(seq.size()), Dinv(seq.size());
  for (long n = lo; n < hi; ++n) {
    D[n - lo] = seq.at(n).jacobian(zero);
    Dinv[n - lo] = D[n - lo].inverse();
  }
  auto cone_u = [&](long n) -> const Cone& { return cones.u[n - cones.n_min]; };
  auto cone_s = [&](long n) -> const Cone& { return cones.s[n - cones.n_min]; };
  std::vector<SubspacePair> pairs;
  for (long n = lo; n <= hi; ++n) {
    SubspacePair p;
    long j0 = std::max(lo, n - window);
    Mat U = orthonormalize(cone_u(j0).center);
    for (long j = j0; j < n && U.cols() > 0; ++j) {
      U = orthonormalize(D[j - lo] * U);
      if (angle_to_center(U, cone_u(j + 1).center) > cone_u(j + 1).zeta)
        throw ConeEscape(j + 1, "unstable subspace left K^u at index " + std::to_string(j + 1));
    }
    long j1 = std::min(hi, n + window);
    Mat S = orthonormalize(cone_s(j1).center);
    for (long j = j1 - 1; j >= n && S.cols() > 0; --j) {
      S = orthonormalize(Dinv[j - lo] * S);
      if (angle_to_center(S, cone_s(j).center) > cone_s(j).zeta)
        throw ConeEscape(j, "stable subspace left K^s at index " + std::to_string(j));
    }
    p.eu = U;
    p.es = S;
    pairs.push_back(std::move(p));
  }
  return Splitting(lo, std::move(pairs));
}

Vec CoordMap::eval(const Vec& a, const Vec& b) const {
  Vec z(a_dim + b_dim);
  z << a, b;
  return apply(z);
}

Vec CoordMap::g(const Vec& a, const Vec& b) const {
  return eval(a, b).head(a_dim) - A * a;
}

Vec CoordMap::h(const Vec& a, const Vec& b) const {
  return eval(a, b).tail(b_dim) - B * b;
}

CoordMap split_map(const Germ::Fn& f, const Germ::JacFn& jac, const SubspacePair& from,
                   const SubspacePair& to) {
  CoordMap m;
  m.a_dim = from.u_dim();
  m.b_dim = from.s_dim();
  Mat Bf = from.basis();
  Mat Pt = to.basis().inverse();
  m.apply = [f, Bf, Pt](const Vec& z) { return Vec(Pt * f(Bf * z)); };
  if (jac) m.jacobian = [jac, Bf, Pt](const Vec& z) { return Mat(Pt * jac(Bf * z) * Bf); };
  else m.jacobian = [f, Bf, Pt](const Vec& z) { return Mat(Pt * fd_jacobian(f, Bf * z) * Bf); };
  Mat J0 = m.jacobian(Vec::Zero(m.a_dim + m.b_dim));
  m.A = J0.topLeftCorner(m.a_dim, m.a_dim);
  m.B = J0.bottomRightCorner(m.b_dim, m.b_dim);
  return m;
}

CoordMap nonlinear_split(const Germ& germ, const SubspacePair& from, const SubspacePair& to) {
  Germ g = germ;
  return split_map([g](const Vec& x) { return g(x); },
                   [g](const Vec& x) { return g.jacobian(x); }, from, to);
}

CoordMap swap_inverse(const CoordMap& m) {
  CoordMap out;
  out.a_dim = m.b_dim;
  out.b_dim = m.a_dim;
  const int ka = m.a_dim, kb = m.b_dim, d = ka + kb;
  auto swap = [ka, kb](const Vec& z) {  // (a,b) -> (b,a)
    Vec s(ka + kb);
    s << z.tail(kb), z.head(ka);
    return s;
  };
  auto unswap = [ka, kb](const Vec& s) {  // (b,a) -> (a,b)
    Vec z(ka + kb);
    z << s.tail(ka), s.head(kb);
    return z;
  };
  Mat J0inv = m.jacobian(Vec::Zero(d)).inverse();
  Vec c0 = m.apply(Vec::Zero(d));
  auto preimage = [m, J0inv, c0, d](const Vec& y) {
    double tol = 1e-15 * std::max(1e-300, y.norm() + c0.norm());
    auto res = damped_newton(m.apply, m.jacobian, y, J0inv * (y - c0), tol);
    if (res.residual > 1e-12 * std::max(1.0, y.norm()))
      throw NewtonFail("inverse coordinate map did not converge");
    (void)d;
    return res.x;
  };
  out.apply = [preimage, swap, unswap](const Vec& s) { return swap(preimage(unswap(s))); };
  out.jacobian = [m, preimage, unswap, ka, kb](const Vec& s) {
    Mat Ji = m.jacobian(preimage(unswap(s))).inverse();
    // rows and columns both permuted
    Mat P = Mat::Zero(ka + kb, ka + kb);
    for (int i = 0; i < kb; ++i) P(i, ka + i) = 1.0;
    for (int i = 0; i < ka; ++i) P(kb + i, i) = 1.0;
    return Mat(P * Ji * P.transpose());
  };
  Mat J0 = out.jacobian(Vec::Zero(d));
  out.A = J0.topLeftCorner(out.a_dim, out.a_dim);
  out.B = J0.bottomRightCorner(out.b_dim, out.b_dim);
  return out;
}

Eigen::VectorXd lyapunov_spectrum(const GermSequence& seq, long m, long n) {
  const int d = seq.dim();
  Mat Q = Mat::Identity(d, d);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  const Vec zero = Vec::Zero(d);
  std::map<const void*, Mat> cache;
  for (long k = m; k < n; ++k) {
    const Germ& g = seq.at(k);
    auto it = cache.find(g.id());
    if (it == cache.end()) it = cache.emplace(g.id(), g.jacobian(zero)).first;
    Eigen::HouseholderQR<Mat> qr(it->second * Q);
    Q = qr.householderQ() * Mat::Identity(d, d);
    for (int i = 0; i < d; ++i) sum(i) += std::log(std::abs(qr.matrixQR()(i, i)));
  }
  sum /= static_cast<double>(n - m);
  std::sort(sum.data(), sum.data() + d, std::greater<double>());
  return sum;
}

}  // namespace ehyp
