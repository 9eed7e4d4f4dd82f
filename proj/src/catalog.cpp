#include "ehyp/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ehyp/errors.hpp"

namespace ehyp {

using nlohmann::json;

namespace {

template <class T>
T get(const json& p, const char* key, T def) {
  if (p.is_object() && p.contains(key)) return p.at(key).get<T>();
  return def;
}

Mat mat_from_json(const json& j) {
  const long rows = static_cast<long>(j.size());
  const long cols = rows ? static_cast<long>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

Vec vec_from_json(const json& j) {
  Vec v(static_cast<long>(j.size()));
  for (long i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

// Columns given as a list of vectors.
Mat columns_from_json(const json& j, int dim) {
  Mat m(dim, static_cast<long>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) m.col(static_cast<long>(c)) = vec_from_json(j[c]);
  return m;
}

Germ linear_germ(const Mat& A, std::optional<double> hint = 0.0) {
  Mat Ainv = A.inverse();
  return Germ(static_cast<int>(A.rows()), [A](const Vec& x) { return Vec(A * x); },
              [A](const Vec&) { return A; }, Box{}, [Ainv](const Vec& y) { return Vec(Ainv * y); },
              hint);
}

SubspacePair axes(int d, int u) {
  Mat I = Mat::Identity(d, d);
  return SubspacePair{I.leftCols(u), I.rightCols(d - u)};
}

System stationary(std::string name, const Germ& g, const SubspacePair& sp, const json& params) {
  long lo = get<long>(params, "n_min", 0), hi = get<long>(params, "n_max", 63);
  if (hi < lo) throw ConfigError("n_max must not be below n_min");
  double alpha = get<double>(params, "alpha", 1.0);
  System s;
  s.name = std::move(name);
  s.seq = GermSequence(lo, std::vector<Germ>(hi - lo + 1, g), alpha);
  s.split = Splitting::constant(sp, lo, hi + 1);
  return s;
}

Germ quad_germ(double alpha) {
  const double h = 0.45;
  // |Df(p) - Df(q)| = 2 max(|dx|, |dy|) <= 2 |p - q|, and |p - q| <= 2h sqrt 2 on the box.
  double hint = 2.0 * std::pow(2.0 * h * std::sqrt(2.0), 1.0 - alpha);
  return Germ(
      2,
      [](const Vec& x) {
        Vec y(2);
        y << 2 * x(0) + x(1) * x(1), 0.5 * x(1) + x(0) * x(0);
        return y;
      },
      [](const Vec& x) {
        Mat J(2, 2);
        J << 2, 2 * x(1), 2 * x(0), 0.5;
        return J;
      },
      Box::cube(2, h), {}, hint);
}

Germ polynomial_germ(const json& poly, int dim) {
  struct Term {
    double coef;
    std::vector<int> pw;
  };
  std::vector<std::vector<Term>> comps;
  for (const auto& comp : poly) {
    std::vector<Term> terms;
    for (const auto& t : comp) {
      Term term{t.at("coef").get<double>(), t.at("powers").get<std::vector<int>>()};
      if (static_cast<int>(term.pw.size()) != dim) throw ConfigError("polynomial term has wrong arity");
      terms.push_back(std::move(term));
    }
    comps.push_back(std::move(terms));
  }
  if (static_cast<int>(comps.size()) != dim) throw ConfigError("polynomial map has wrong dimension");
  auto f = [comps, dim](const Vec& x) {
    Vec y = Vec::Zero(dim);
    for (int i = 0; i < dim; ++i)
      for (const auto& t : comps[i]) {
        double v = t.coef;
        for (int j = 0; j < dim; ++j) v *= std::pow(x(j), t.pw[j]);
        y(i) += v;
      }
    return y;
  };
  auto jac = [comps, dim](const Vec& x) {
    Mat J = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (const auto& t : comps[i])
        for (int k = 0; k < dim; ++k) {
          if (t.pw[k] == 0) continue;
          double v = t.coef * t.pw[k] * std::pow(x(k), t.pw[k] - 1);
          for (int j = 0; j < dim; ++j)
            if (j != k) v *= std::pow(x(j), t.pw[j]);
          J(i, k) += v;
        }
    return J;
  };
  return Germ(dim, f, jac);
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"diag_linear", "alt_3_half", "pliss_blocks", "quad_hyperbolic", "cat_germ",
          "uniform_setting"};
}

double pliss_rate(long n) {
  if (n <= 1) return 4.0;
  long k = 0;
  while ((2L << k) <= n) ++k;  // 2^k <= n < 2^{k+1}
  long start = 1L << k;
  return n < start + start / 2 ? 4.0 : -3.0;
}

System builtin(const std::string& name, const json& params) {
  const double alpha = get<double>(params, "alpha", 1.0);
  if (name == "diag_linear") {
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = get<double>(params, "mu", 2.0);
    A(1, 1) = get<double>(params, "lambda", 0.5);
    return stationary(name, linear_germ(A), axes(2, 1), params);
  }
  if (name == "quad_hyperbolic") return stationary(name, quad_germ(alpha), axes(2, 1), params);
  if (name == "uniform_setting") {
    const double mu = get<double>(params, "mu", 2.0), lam = get<double>(params, "lambda", 0.5);
    const double dl = get<double>(params, "delta", 0.05), r0 = get<double>(params, "r0", 0.5);
    const double c = dl / (2.0 * r0);
    Germ g(
        2,
        [mu, lam, c](const Vec& x) {
          Vec y(2);
          y << mu * x(0) + c * x(1) * x(1), lam * x(1) + c * x(0) * x(0);
          return y;
        },
        [mu, lam, c](const Vec& x) {
          Mat J(2, 2);
          J << mu, 2 * c * x(1), 2 * c * x(0), lam;
          return J;
        },
        Box::cube(2, r0), {}, 2.0 * c * std::pow(2.0 * r0 * std::sqrt(2.0), 1.0 - alpha));
    return stationary(name, g, axes(2, 1), params);
  }
  if (name == "cat_germ") {
    Mat A = params.contains("matrix") ? mat_from_json(params["matrix"]) : Mat{{2, 1}, {1, 1}};
    auto [eu, es] = eigen_splitting(A);
    System s = stationary(name, linear_germ(A), SubspacePair{eu, es}, params);
    return s;
  }
  long lo = get<long>(params, "n_min", 0), hi = get<long>(params, "n_max", 63);
  if (hi < lo) throw ConfigError("n_max must not be below n_min");
  System s;
  s.name = name;
  if (name == "alt_3_half") {
    Germ even = linear_germ(Mat{{3, 0}, {0, 0.5}}), odd = linear_germ(Mat{{0.5, 0}, {0, 3}});
    std::vector<Germ> g;
    for (long n = lo; n <= hi; ++n) g.push_back(n % 2 == 0 ? even : odd);
    s.seq = GermSequence(lo, std::move(g), alpha);
    s.split = Splitting::constant(axes(2, 2), lo, hi + 1);
    return s;
  }
  if (name == "pliss_blocks") {
    const bool embed = get<bool>(params, "embed", false);
    const double mu_s = get<double>(params, "mu_s", 0.5);
    Germ up = linear_germ(embed ? Mat{{std::exp(4.0), 0}, {0, mu_s}} : Mat{{std::exp(4.0)}});
    Germ down = linear_germ(embed ? Mat{{std::exp(-3.0), 0}, {0, mu_s}} : Mat{{std::exp(-3.0)}});
    std::vector<Germ> g;
    for (long n = lo; n <= hi; ++n) g.push_back(pliss_rate(n) > 0 ? up : down);
    s.seq = GermSequence(lo, std::move(g), alpha);
    s.split = Splitting::constant(embed ? axes(2, 1) : axes(1, 1), lo, hi + 1);
    return s;
  }
  throw UnknownBuiltin("unknown builtin '" + name + "'");
}

System system_from_descriptor(const json& desc) {
  const int dim = desc.at("dimension").get<int>();
  const double alpha = get<double>(desc, "alpha", 1.0);
  long lo = 0, hi = 63;
  if (desc.contains("range")) {
    lo = desc["range"].at(0).get<long>();
    hi = desc["range"].at(1).get<long>();
  }
  const json& maps = desc.at("maps");
  if (!maps.is_array() || maps.empty()) throw ConfigError("maps must be a nonempty array");
  System s;
  if (maps[0].contains("builtin")) {
    if (maps.size() != 1) throw ConfigError("a builtin must be the only map");
    json p = maps[0].value("params", json::object());
    p["n_min"] = lo;
    p["n_max"] = hi;
    p["alpha"] = alpha;
    s = builtin(maps[0]["builtin"].get<std::string>(), p);
    if (s.seq.dim() != dim) throw ConfigError("builtin dimension does not match the descriptor");
    if (!desc.contains("splitting")) return s;
  } else {
    std::vector<Germ> cycle;
    for (const auto& m : maps) {
      if (m.contains("polynomial")) cycle.push_back(polynomial_germ(m["polynomial"], dim));
      else if (m.contains("linear")) cycle.push_back(linear_germ(mat_from_json(m["linear"]), 0.0));
      else throw ConfigError("map entries need builtin, polynomial or linear");
    }
    std::vector<Germ> g;
    for (long n = lo; n <= hi; ++n) g.push_back(cycle[(n - lo) % cycle.size()]);
    s.name = "descriptor";
    s.seq = GermSequence(lo, std::move(g), alpha);
  }
  const json sp = desc.value("splitting", json("auto-eigen"));
  if (sp.is_string() && sp.get<std::string>() == "auto-eigen") {
    std::vector<SubspacePair> pairs;
    const Vec zero = Vec::Zero(dim);
    for (long n = lo; n <= hi + 1; ++n) {
      auto [eu, es] = eigen_splitting(s.seq.at(std::min(n, hi)).jacobian(zero));
      pairs.push_back(SubspacePair{eu, es});
    }
    s.split = Splitting(lo, std::move(pairs));
  } else if (sp.is_object() && sp.contains("explicit")) {
    const json& e = sp["explicit"];
    SubspacePair p{columns_from_json(e.at("u"), dim), columns_from_json(e.value("s", json::array()), dim)};
    s.split = Splitting::constant(p, lo, hi + 1);
  } else if (sp.is_object() && sp.contains("cones")) {
    const json& c = sp["cones"];
    ConeField cf;
    cf.n_min = lo;
    Cone cu{columns_from_json(c.at("u"), dim), c.value("zeta_u", 0.5)};
    Cone cs{columns_from_json(c.at("s"), dim), c.value("zeta_s", 0.5)};
    cf.u.assign(hi - lo + 2, cu);
    cf.s.assign(hi - lo + 2, cs);
    s.split = cones_to_splitting(s.seq, cf, c.value("window", 20));
  } else {
    throw ConfigError("splitting must be auto-eigen, explicit or cones");
  }
  return s;
}

ChartResult chart_adapter(const Germ::Fn& f, const Germ::JacFn& jac,
                          const std::vector<Vec>& points, int u_dim, const std::vector<Mat>& frames,
                          bool torus, double alpha, double probe_radius, std::uint64_t seed) {
  const long p = static_cast<long>(points.size()) - 1;
  if (p < 1) throw PreconditionViolated("orbit needs at least two points");
  const int d = static_cast<int>(points[0].size());
  auto frame = [&](long k) { return frames.empty() ? Mat(Mat::Identity(d, d)) : frames.at(k); };
  for (long k = 0; k < p; ++k) {
    Vec gap = torus_diff(f(points[k]), points[k + 1], torus);
    if (gap.norm() > 1e-10 * std::max(1.0, points[k + 1].norm()))
      throw OrbitMismatch(k, "f(x_k) differs from x_{k+1} at k = " + std::to_string(k));
  }
  std::vector<Germ> germs;
  for (long k = 0; k < p; ++k) {
    const Vec xk = points[k];
    Vec shift = Vec::Zero(d);
    if (torus) shift = (f(xk) - points[k + 1]).array().round().matrix();
    const Vec off = points[k + 1] + shift;
    const Mat Fk = frame(k), Fn = frame(k + 1);
    Germ::Fn fk = [f, xk, off, Fk, Fn](const Vec& v) { return Vec(Fn.transpose() * (f(xk + Fk * v) - off)); };
    Germ::JacFn jk;
    if (jac) jk = [jac, xk, Fk, Fn](const Vec& v) { return Mat(Fn.transpose() * jac(xk + Fk * v) * Fk); };
    germs.emplace_back(d, fk, jk);
  }
  ChartResult out;
  out.seq = GermSequence(0, std::move(germs), alpha);
  ConeField cones;
  cones.n_min = 0;
  const Mat I = Mat::Identity(d, d);
  cones.u.assign(p + 1, Cone{I.leftCols(u_dim), std::numbers::pi / 2});
  cones.s.assign(p + 1, Cone{I.rightCols(d - u_dim), std::numbers::pi / 2});
  out.split = cones_to_splitting(out.seq, cones, static_cast<int>(p));

  Rng rng(seed);
  double L = 0.0;
  for (long k = 0; k < p; ++k) {
    const Germ& g = out.seq.at(k);
    for (int i = 0; i < 9; ++i) {
      Vec v = i == 0 ? Vec(Vec::Zero(d)) : rng.in_ball(d, probe_radius);
      Eigen::JacobiSVD<Mat> svd(g.jacobian(v));
      double smax = svd.singularValues()(0), smin = svd.singularValues()(d - 1);
      L = std::max({L, std::abs(std::log(smax)), std::abs(std::log(smin)), std::log(smax / smin)});
    }
    L = std::max(L, holder_estimate(g, alpha, probe_radius, 16).certified);
  }
  out.L = L;
  return out;
}

OrbitSegment torus_segment(const Mat& A, const Vec& x0, long p) {
  // The map acts on the covering space; points are kept in [0,1)^d.
  auto f = [A](const Vec& x) { return Vec(A * x); };
  auto wrap = [](const Vec& x) { return Vec(x - x.array().floor().matrix()); };
  OrbitSegment seg;
  seg.dim = static_cast<int>(A.rows());
  seg.f = f;
  seg.jac = [A](const Vec&) { return A; };
  seg.torus = true;
  seg.points.push_back(wrap(x0));
  for (long k = 0; k < p; ++k) seg.points.push_back(wrap(f(seg.points.back())));
  seg.split = orbit_splitting(seg.f, seg.jac, seg.points);
  return seg;
}

OrbitSegment map_segment(const Germ::Fn& f, const Germ::JacFn& jac, const Vec& x0, long p,
                         bool torus) {
  OrbitSegment seg;
  seg.dim = static_cast<int>(x0.size());
  seg.f = f;
  seg.jac = jac;
  seg.torus = torus;
  seg.points.push_back(x0);
  for (long k = 0; k < p; ++k) seg.points.push_back(f(seg.points.back()));
  seg.split = orbit_splitting(f, jac, seg.points);
  return seg;
}

}  // namespace ehyp
