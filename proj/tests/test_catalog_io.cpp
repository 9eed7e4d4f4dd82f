#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ehyp/catalog.hpp"
#include "ehyp/errors.hpp"
#include "ehyp/io.hpp"

using namespace ehyp;
using nlohmann::json;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const Mat kCat{{2, 1}, {1, 1}};

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("builtin names resolve") {
  for (const auto& name : builtin_names()) {
    System s = builtin(name, {{"n_max", 7}});
    CHECK(s.seq.size() == 8);
    CHECK(s.split.contains(8));
  }
  CHECK_THROWS_AS(builtin("no_such_system"), UnknownBuiltin);
  CHECK_THROWS_AS(builtin("diag_linear", {{"n_min", 5}, {"n_max", 2}}), ConfigError);
}

TEST_CASE("alt_3_half alternates") {
  System s = builtin("alt_3_half", {{"n_max", 3}});
  Mat d0 = s.seq.at(0).jacobian(Vec::Zero(2)), d1 = s.seq.at(1).jacobian(Vec::Zero(2));
  CHECK(d0.isApprox(Mat{{3, 0}, {0, 0.5}}));
  CHECK(d1.isApprox(Mat{{0.5, 0}, {0, 3}}));
  CHECK(s.split.at(0).u_dim() == 2);
  CHECK(s.split.at(0).s_dim() == 0);
}

TEST_CASE("pliss_blocks rates") {
  std::vector<double> expect{4, 4, 4, -3, 4, 4, -3, -3, 4, 4, 4, 4, -3, -3, -3, -3, 4};
  for (long n = 0; n < static_cast<long>(expect.size()); ++n) CHECK(pliss_rate(n) == expect[n]);
  System s = builtin("pliss_blocks", {{"n_max", 4}});
  CHECK(s.seq.at(0)(Vec::Ones(1))(0) == doctest::Approx(std::exp(4.0)));
  CHECK(s.seq.at(3)(Vec::Ones(1))(0) == doctest::Approx(std::exp(-3.0)));
  System e = builtin("pliss_blocks", {{"n_max", 4}, {"embed", true}, {"mu_s", 0.25}});
  CHECK(e.seq.dim() == 2);
  CHECK(e.seq.at(1).jacobian(Vec::Zero(2))(1, 1) == 0.25);
}

TEST_CASE("quad_hyperbolic map") {
  System s = builtin("quad_hyperbolic");
  Vec y = s.seq.at(0)(v2(0.1, 0.2));
  CHECK(y(0) == doctest::Approx(0.2 + 0.04));
  CHECK(y(1) == doctest::Approx(0.1 + 0.01));
  CHECK(s.seq.at(0).holder_hint().has_value());
}

TEST_CASE("cat_germ splitting is the eigensplitting") {
  System s = builtin("cat_germ");
  const auto& sp = s.split.at(0);
  const double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK((kCat * sp.eu).isApprox(phi * phi * sp.eu, 1e-12));
  CHECK((kCat * sp.es).isApprox(sp.es / (phi * phi), 1e-12));
}

TEST_CASE("descriptor with a builtin") {
  json d = {{"dimension", 2}, {"range", {2, 9}}, {"maps", {{{"builtin", "diag_linear"}}}}};
  System s = system_from_descriptor(d);
  CHECK(s.seq.n_min() == 2);
  CHECK(s.seq.n_max() == 9);
  json bad = {{"dimension", 3}, {"maps", {{{"builtin", "diag_linear"}}}}};
  CHECK_THROWS_AS(system_from_descriptor(bad), ConfigError);
}

TEST_CASE("descriptor with polynomial maps") {
  // (2x + y^2, 0.5y) then (3x, 0.25y), repeated.
  json p1 = {{{{"coef", 2}, {"powers", {1, 0}}}, {{"coef", 1}, {"powers", {0, 2}}}},
             {{{"coef", 0.5}, {"powers", {0, 1}}}}};
  json p2 = {{{{"coef", 3}, {"powers", {1, 0}}}}, {{{"coef", 0.25}, {"powers", {0, 1}}}}};
  json d = {{"dimension", 2}, {"range", {0, 5}}, {"maps", {{{"polynomial", p1}}, {{"polynomial", p2}}}}};
  System s = system_from_descriptor(d);
  Vec y = s.seq.at(2)(v2(0.1, 0.3));
  CHECK(y(0) == doctest::Approx(0.2 + 0.09));
  Mat J = s.seq.at(4).jacobian(v2(0.1, 0.3));
  CHECK(J.isApprox(Mat{{2, 0.6}, {0, 0.5}}));
  CHECK(s.seq.at(3).jacobian(v2(0, 0)).isApprox(Mat{{3, 0}, {0, 0.25}}));
  CHECK(std::abs(s.split.at(0).eu(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(s.split.at(0).es(1, 0)) == doctest::Approx(1.0));

  json arity = {{"dimension", 2}, {"maps", {{{"polynomial", {{{{"coef", 1}, {"powers", {1}}}}, json::array()}}}}}};
  CHECK_THROWS_AS(system_from_descriptor(arity), ConfigError);
  json none = {{"dimension", 2}, {"maps", {{{"rotation", 1}}}}};
  CHECK_THROWS_AS(system_from_descriptor(none), ConfigError);
}

TEST_CASE("descriptor splittings") {
  json lin = {{"linear", {{2, 1}, {1, 1}}}};
  json d = {{"dimension", 2}, {"range", {0, 10}}, {"maps", {lin}}};
  System eig = system_from_descriptor(d);
  const double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK((kCat * eig.split.at(3).eu).isApprox(phi * phi * eig.split.at(3).eu, 1e-12));

  d["splitting"] = {{"explicit", {{"u", {{1, 0}}}, {"s", {{0, 1}}}}}};
  System ex = system_from_descriptor(d);
  CHECK(ex.split.at(5).eu.isApprox(Mat{{1}, {0}}));

  d["splitting"] = {{"cones", {{"u", {{1, 0.5}}}, {"s", {{-0.5, 1}}}, {"zeta_u", 0.7}, {"zeta_s", 0.7}}}};
  System co = system_from_descriptor(d);
  // E^u needs a forward history and E^s a backward one.
  const auto& late = co.split.at(10);
  const auto& early = co.split.at(0);
  CHECK((kCat * late.eu).isApprox(phi * phi * late.eu, 1e-8));
  CHECK((kCat * early.es).isApprox(early.es / (phi * phi), 1e-8));

  d["splitting"] = "guess";
  CHECK_THROWS_AS(system_from_descriptor(d), ConfigError);
}

TEST_CASE("chart adapter of a linear map at the origin") {
  Mat A{{2, 0}, {0, 0.5}};
  auto f = [A](const Vec& x) { return Vec(A * x); };
  auto jac = [A](const Vec&) { return A; };
  std::vector<Vec> pts(4, Vec::Zero(2));
  auto ch = chart_adapter(f, jac, pts, 1);
  REQUIRE(ch.seq.size() == 3);
  Vec v = v2(0.01, -0.02);
  CHECK(ch.seq.at(1)(v).isApprox(f(v)));
  CHECK(ch.L == doctest::Approx(std::log(4.0)));
  CHECK(ch.split.at(0).eu.isApprox(Mat{{1}, {0}}));
}

TEST_CASE("chart adapter along a torus orbit") {
  auto seg = torus_segment(kCat, v2(0.75, 0.5), 3);
  CHECK(torus_diff(seg.points[3], seg.points[0], true).norm() < 1e-12);
  auto pts = seg.points;
  pts.push_back(pts[1]);
  auto ch = chart_adapter(seg.f, seg.jac, pts, 1, {}, true);
  Mat prod = Mat::Identity(2, 2);
  for (long k = 0; k < 3; ++k) {
    CHECK(ch.seq.at(k).jacobian(Vec::Zero(2)).isApprox(kCat));
    CHECK(ch.seq.at(k)(Vec::Zero(2)).norm() < 1e-12);
    prod = ch.seq.at(k).jacobian(Vec::Zero(2)) * prod;
  }
  CHECK(prod.isApprox(kCat * kCat * kCat));

  pts[2](0) += 0.01;
  try {
    chart_adapter(seg.f, seg.jac, pts, 1, {}, true);
    FAIL("expected OrbitMismatch");
  } catch (const OrbitMismatch& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("chart adapter with rotated frames") {
  const double c = std::cos(0.3), s = std::sin(0.3);
  Mat R{{c, -s}, {s, c}};
  Mat A{{2, 0}, {0, 0.5}};
  auto f = [A](const Vec& x) { return Vec(A * x); };
  std::vector<Vec> pts(3, Vec::Zero(2));
  auto ch = chart_adapter(f, {}, pts, 1, {R, R, R});
  CHECK(ch.seq.at(0).jacobian(Vec::Zero(2)).isApprox(R.transpose() * A * R, 1e-6));
}

TEST_CASE("number formatting") {
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(1e-300) == "1e-300");
  CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(fmt(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(fmt(std::nan("")) == "nan");
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-1e6, 1e6);
    CHECK(std::stod(fmt(x)) == x);
  }
}

TEST_CASE("csv outputs") {
  System s = builtin("alt_3_half", {{"n_max", 9}});
  LinearData lin = extract_linear_data(s.seq, s.split);
  std::ostringstream lo;
  write_linear_csv(lo, lin);
  CHECK(first_line(lo.str()) == "n,lambda_u,lambda_s,theta,beta");
  CHECK(lo.str().find("-inf") != std::string::npos);

  EffectiveSeries es = effective_series(lin, 1.0);
  auto le = es.lambda_e();
  auto M = m_sequence(le, 0.1);
  auto gamma = eht_detect(le, 0.1);
  std::ostringstream so;
  write_series_csv(so, es, M, gamma);
  CHECK(first_line(so.str()) == "n,delta,lambda_e,beta_flag,M_n,in_gamma");
  long rows = 0;
  for (char ch : so.str()) rows += ch == '\n';
  CHECK(rows == 1 + 11);

  ParamSeq p;
  p.steps.assign(3, ParamStep{0.1, 0.0, 0.01, 1.0, 0.0});
  std::ostringstream po;
  write_params_csv(po, p, nullptr);
  CHECK(first_line(po.str()) == "n,r,tau,sigma,kappa,gamma,c_n,flags");
}

TEST_CASE("json reports keep non-finite values") {
  EffectiveReport r;
  r.chi_s = -std::numeric_limits<double>::infinity();
  r.chi_e = 0.25;
  json j = to_json(r);
  CHECK(j["chi_e"] == 0.25);
  CHECK(j["chi_s"] == "-inf");
  json back = json::parse(j.dump());
  CHECK(back["chi_s"] == "-inf");

  DensityReport d;
  d.bound = 0.1;
  CHECK(to_json(d)["bound"] == 0.1);
}

TEST_CASE("config parsing") {
  json good = {{"system", {{"builtin", "diag_linear"}}},
               {"beta_bar", 2.0},
               {"rates", {{"chi_hat_u", 0.5}, {"chi_bar_u", 0.3}, {"chi_hat_s", -0.5}, {"chi_bar_s", -0.3}}},
               {"seeds", {{"r_bar", 1e-4}, {"kappa_bar", 10}}}};
  RunConfig c = parse_config(good);
  CHECK(c.beta_bar == 2.0);
  REQUIRE(c.seeds);
  CHECK(c.seeds->beta_bar == 2.0);
  CHECK(c.seeds->xi == 0.0);
  CHECK(c.tolerance("newton", 1e-9) == 1e-9);
  c.tol["newton"] = 1e-6;
  CHECK(c.tolerance("newton", 1e-9) == 1e-6);

  json bad = good;
  bad["rates"]["chi_bar_u"] = 0.7;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"beta_bar", 1.0}}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("config with a system file") {
  const auto dir = std::filesystem::temp_directory_path() / "ehyp_test_catalog_io";
  std::filesystem::create_directories(dir);
  write_json(dir / "sys.json", {{"builtin", "quad_hyperbolic"}});
  write_json(dir / "run.json", {{"system", "sys.json"}, {"holder_radius", 0.2}});
  RunConfig c = load_config(dir / "run.json");
  CHECK(c.system["builtin"] == "quad_hyperbolic");
  CHECK(c.holder_radius == 0.2);
  {
    std::ofstream junk(dir / "junk.json");
    junk << "{ not json";
  }
  CHECK_THROWS_AS(read_json(dir / "junk.json"), ConfigError);
  std::filesystem::remove_all(dir);
}
