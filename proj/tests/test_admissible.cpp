#include <doctest.h>

#include <cmath>

#include "ehyp/admissible.hpp"
#include "ehyp/errors.hpp"

using namespace ehyp;

namespace {

Vec s1(double x) { return Vec::Constant(1, x); }
Mat m11(double x) { return Mat::Constant(1, 1, x); }

AdmissibleManifold poly1d(double r, int degree, std::function<double(double)> f,
                          std::function<double(double)> df) {
  return AdmissibleManifold::sample(
      1, 1, r, degree, [f](const Vec& v) { return s1(f(v(0))); },
      [df](const Vec& v) { return m11(df(v(0))); });
}

}  // namespace

TEST_CASE("default degree") {
  CHECK(default_degree(1) == 16);
  CHECK(default_degree(2) == 8);
}

TEST_CASE("evaluation reproduces polynomials") {
  auto z = AdmissibleManifold::zero(1, 1, 1.0, 16);
  CHECK(z.evaluate(s1(0.4)).norm() == 0.0);

  auto lin = poly1d(1.0, 16, [](double v) { return 0.1 * v; }, [](double) { return 0.1; });
  CHECK(lin.evaluate(s1(0.3))(0) == doctest::Approx(0.03).epsilon(1e-14));

  auto sq = poly1d(1.0, 16, [](double v) { return v * v; }, [](double v) { return 2 * v; });
  CHECK(std::abs(sq.evaluate(s1(0.5))(0) - 0.25) < 1e-13);
  CHECK(std::abs(sq.derivative(s1(0.5))(0, 0) - 1.0) < 1e-12);
  CHECK(sq.consistency_error() < 1e-12);
  CHECK_THROWS_AS(sq.evaluate(s1(1.01)), OutOfDomain);
  CHECK_NOTHROW(sq.evaluate_unchecked(s1(1.01)));
}

TEST_CASE("two dimensional base") {
  auto m = AdmissibleManifold::sample(
      2, 1, 0.5, 8, [](const Vec& v) { return s1(v(0) * v(1) + v(1) * v(1)); },
      [](const Vec& v) {
        Mat d(1, 2);
        d << v(1), v(0) + 2 * v(1);
        return d;
      });
  Vec p(2);
  p << 0.2, -0.3;
  CHECK(m.evaluate(p)(0) == doctest::Approx(-0.06 + 0.09).epsilon(1e-13));
  CHECK(m.derivative(p)(0, 1) == doctest::Approx(0.2 - 0.6).epsilon(1e-12));
  p << 0.4, 0.4;
  CHECK_THROWS_AS(m.evaluate(p), OutOfDomain);
}

TEST_CASE("class membership") {
  auto z = AdmissibleManifold::zero(1, 1, 0.5, 16);
  CHECK(class_check(z, {0.5, 0, 0, 0, 0, 1}).member);
  CHECK(class_check(z, {0.5, 0.1, 0.2, 3, 0, 0.5}).member);

  auto steep = poly1d(0.5, 16, [](double v) { return 0.3 * v; }, [](double) { return 0.3; });
  auto c = class_check(steep, {0.5, 0, 0.2, 1, 0, 1});
  CHECK_FALSE(c.member);
  CHECK(c.violation == "sigma");

  const double kappa = 3.0;
  auto half = poly1d(0.5, 16, [=](double v) { return kappa / 2 * v * v; },
                     [=](double v) { return kappa * v; });
  CHECK(holder_seminorm(half, 1.0) == doctest::Approx(kappa).epsilon(1e-10));
  auto eq = class_check(half, {0.5, 0, 0, kappa, 0, 1}, 0.0);
  CHECK(eq.member);
  auto below = class_check(half, {0.5, 0, 0, 0.9 * kappa, 0, 1}, 0.0);
  CHECK_FALSE(below.member);
  CHECK(below.violation == "kappa");
  CHECK(below.magnitude == doctest::Approx(1 / 0.9).epsilon(1e-8));
}

TEST_CASE("class membership is monotone in the parameters") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const double a = rng.uniform(-0.1, 0.1), b = rng.uniform(-0.5, 0.5), c = rng.uniform(-2, 2);
    auto m = poly1d(0.3, 16, [=](double v) { return a + b * v + c * v * v; },
                    [=](double v) { return b + 2 * c * v; });
    auto est = class_check(m, {0.3, 0, 0, 0, 0, 1});
    ClassParams tight{0.3, est.tau_est, est.sigma_est, est.holder_est, 0, 1};
    REQUIRE(class_check(m, tight, 0.0).member);
    for (int j = 0; j < 5; ++j) {
      ClassParams loose{0.3, tight.tau * (1 + rng.uniform()), tight.sigma * (1 + rng.uniform()),
                        tight.kappa * (1 + rng.uniform()), 0, 1};
      CHECK(class_check(m, loose, 0.0).member);
    }
  }
}

TEST_CASE("C0 distance") {
  auto sq = poly1d(1.0, 16, [](double v) { return v * v; }, [](double v) { return 2 * v; });
  auto cu = poly1d(1.0, 16, [](double v) { return v * v * v; }, [](double v) { return 3 * v * v; });
  CHECK(c0_distance(sq, sq) == 0.0);
  CHECK(c0_distance(sq, cu) == doctest::Approx(2.0).epsilon(1e-12));
  auto z = AdmissibleManifold::zero(1, 1, 1.0, 16);
  auto c = poly1d(1.0, 16, [](double) { return -0.25; }, [](double) { return 0.0; });
  CHECK(c0_distance(z, c) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("json round trip") {
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    auto m = AdmissibleManifold::sample(
        2, 2, 0.2, 6,
        [=](const Vec& v) {
          Vec w(2);
          w << a * v(0) * v(1), b * v(0) * v(0);
          return w;
        },
        [=](const Vec& v) {
          Mat d(2, 2);
          d << a * v(1), a * v(0), 2 * b * v(0), 0;
          return d;
        },
        {0.2, 0.0, 0.1, 2.0, 0.5, 0.7});
    auto back = manifold_from_json(nlohmann::json::parse(manifold_to_json(m).dump()));
    CHECK(back.k() == 2);
    CHECK(back.s_dim() == 2);
    CHECK(back.degree() == 6);
    CHECK(back.params.alpha == 0.7);
    CHECK(c0_distance(m, back) == 0.0);
    for (std::size_t i = 0; i < m.node_count(); ++i) CHECK(m.deriv(i) == back.deriv(i));
  }
}
