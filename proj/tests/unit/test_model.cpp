#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "support.hpp"
#include "walsh/error.hpp"
#include "walsh/model.hpp"
#include "walsh/quadrature.hpp"

using namespace walsh;
using testing::constant;
using testing::Draws;

TEST_CASE("coefficient evaluation") {
  const CoefficientField f = testing::uniform_field(3, -1.0, 1.0);
  CHECK(f.eval(TreePoint::on_ray(0, 3.0)).drift == -1.0);

  const CoefficientField bang({{constant(-1.0), constant(1.0)}, {constant(-2.0), constant(1.0)}});
  CHECK(bang.eval(TreePoint::on_ray(1, 5.0)).drift == -2.0);
  CHECK(bang.eval(TreePoint::origin(), 1).drift == -2.0);

  const auto tab = RadialCoefficient::tabulated({0.0, 1.0}, {1.0, 2.0});
  CHECK(tab(0.5) == doctest::Approx(1.5));
  CHECK(tab(7.0) == 2.0);
  CHECK(RadialCoefficient::affine(1.0, 2.0)(3.0) == 7.0);

  CHECK_THROWS_AS(RadialCoefficient::tabulated({0.5, 1.0}, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(RadialCoefficient::tabulated({0.0, 0.0}, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(CoefficientField({{constant(0.0), constant(0.0)}}), DomainError);
  CHECK_THROWS_AS(CoefficientField({{constant(0.0), RadialCoefficient::affine(1.0, -1.0)}}), DomainError);

  const CoefficientField bounded({{constant(0.0), constant(1.0), 2.0}});
  CHECK_THROWS_AS(bounded.eval(TreePoint::on_ray(0, 2.5)), DomainError);
  CHECK_THROWS_AS(bounded.check_compatible(testing::planar({0.5, 0.5})), DomainError);
}

TEST_CASE("scale function") {
  const CoefficientField f = testing::uniform_field(1, -1.0, 1.0);
  const ScaleTransform st(f, RadialGrid{});
  CHECK(st.scale(0, 1.0) == doctest::Approx((std::exp(2.0) - 1.0) / 2.0).epsilon(1e-10));
  CHECK(st.scale(0, 0.0) == 0.0);

  const ScaleTransform flat(testing::uniform_field(1, 0.0, 1.7), RadialGrid{});
  for (double r : {0.3, 1.0, 4.2}) {
    CHECK(flat.scale(0, r) == doctest::Approx(r).epsilon(1e-12));
    CHECK(flat.transformed_dispersion(0, r) == doctest::Approx(1.7).epsilon(1e-12));
  }

  Draws d(1);
  for (int k = 0; k < 100; ++k) {
    const double r = d.uniform(0.0, 5.0);
    REQUIRE(std::abs(st.inverse(0, st.scale(0, r)) - r) <= 1e-8 * std::max(1.0, r));
  }
}

TEST_CASE("scale removes the drift on random fields") {
  Draws d(2);
  const RadialGrid grid;
  for (int trial = 0; trial < 20; ++trial) {
    RayCoefficients rc;
    switch (trial % 3) {
      case 0:
        rc.drift = constant(d.uniform(-2.0, 1.0));
        break;
      case 1:
        rc.drift = RadialCoefficient::affine(d.uniform(-1.0, 1.0), d.uniform(-0.5, 0.0));
        break;
      default:
        rc.drift = RadialCoefficient::tabulated({0.0, 1.0, 2.5}, {d.uniform(-1, 1), d.uniform(-1, 1), d.uniform(-1, 0)});
    }
    rc.dispersion = RadialCoefficient::tabulated({0.0, 2.0}, {d.uniform(0.5, 2.0), d.uniform(0.5, 2.0)});
    const RayQuadrature q(rc, grid);
    for (double r = 0.0; r <= 6.0; r += 0.25)
      REQUIRE(q.scale_derivative(r) * std::exp(q.exponent(r)) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("stationary law against the constant-coefficient closed form") {
  const RadialGrid grid;
  Draws d(3);
  for (int trial = 0; trial < 10; ++trial) {
    const double g = trial == 0 ? -1.0 : d.uniform(-3.0, -0.3);
    const double s = trial == 0 ? 1.0 : d.uniform(0.5, 2.0);
    const double lambda = -2.0 * g / (s * s);
    const RadialStationary st = stationary_radial(testing::uniform_field(1, g, s), 0, grid);
    REQUIRE(st.finite);
    CHECK(st.normalizer == doctest::Approx(1.0 / (s * s * lambda)).epsilon(1e-9));
    CHECK(st.mean_radius == doctest::Approx(1.0 / lambda).epsilon(1e-8));
    double sup = 0.0;
    for (std::size_t k = 0; k < st.r.size(); ++k)
      if (st.r[k] <= 10.0) sup = std::max(sup, std::abs(st.density[k] - lambda * std::exp(-lambda * st.r[k])));
    CHECK(sup <= 1e-6);
  }
  const RadialStationary bm = stationary_radial(testing::uniform_field(1, 0.0, 1.0), 0, grid);
  CHECK_FALSE(bm.finite);
  CHECK(std::isinf(bm.normalizer));
}

TEST_CASE("spider stationary masses") {
  const RadialGrid grid;
  const StationaryProfile three(testing::uniform_field(3, -1.0, 1.0), testing::planar({0.5, 0.3, 0.2}), grid);
  CHECK(three.masses()[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(three.masses()[1] == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(three.masses()[2] == doctest::Approx(0.2).epsilon(1e-10));

  const StationaryProfile one(testing::uniform_field(1, -1.0, 1.0), testing::planar({1.0}), grid);
  CHECK(one.masses()[0] == 1.0);
  CHECK(one.quantile(0, 0.5) == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-9));
  CHECK(one.cdf(0, one.quantile(0, 0.9)) == doctest::Approx(0.9).epsilon(1e-9));

  // g = -1 on both rays, sigma = (1, 2): C = 1/(sigma^2 lambda) = 1/2 on both.
  const CoefficientField two({{constant(-1.0), constant(1.0)}, {constant(-1.0), constant(2.0)}});
  const StationaryProfile p2(two, testing::planar({0.25, 0.75}), grid);
  CHECK(p2.normalizers()[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p2.normalizers()[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p2.masses()[0] == doctest::Approx(0.25).epsilon(1e-9));

  const CoefficientField mixed({{constant(-1.0), constant(1.0)}, {constant(0.0), constant(1.0)}});
  try {
    StationaryProfile bad(mixed, testing::planar({0.5, 0.5}), grid);
    FAIL("expected a non-normalizable error");
  } catch (const NonNormalizableError& e) {
    CHECK(e.ray() == 1);
  }
}

TEST_CASE("stationarity: the stationary law annihilates the generator") {
  // f = r^2 is in the domain class; Lf = 2 g r + sigma^2 on each ray.
  const CoefficientField field({{constant(-1.0), constant(1.0)},
                                {RadialCoefficient::affine(-0.5, -0.5), constant(1.5)},
                                {constant(-2.0), RadialCoefficient::tabulated({0.0, 1.0}, {1.0, 1.5})}});
  const SpinningMeasure mu = testing::planar({0.5, 0.3, 0.2});
  const StationaryProfile profile(field, mu, RadialGrid{});
  const TestFunction f = TestFunction::power(2.0);
  const quad::AdaptiveSimpson simpson(1e-11);
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double integral = 0.0;
    for (double a = 0.0; a < 40.0; a += 1.0)  // kinks sit at integer radii
      integral += simpson.integrate(
          [&](double r) { return ray_generator(field, i, f, r) * profile.density(i, r); }, a, a + 1.0);
    total += profile.masses()[i] * integral;
  }
  CHECK(std::abs(total) < 1e-6);
}

TEST_CASE("generator") {
  const CoefficientField f = testing::uniform_field(2, -1.0, 1.0);
  const SpinningMeasure mu = testing::planar({0.5, 0.5});
  CHECK(apply_generator(f, mu, TestFunction::power(2.0), TreePoint::on_ray(1, 1.0)) == doctest::Approx(-1.0));
  CHECK(apply_generator(f, mu, TestFunction::constant(3.0), TreePoint::on_ray(0, 2.0)) == 0.0);
  CHECK(apply_generator(f, mu, TestFunction::power(2.0), TreePoint::origin()) == doctest::Approx(1.0));
  try {
    apply_generator(f, mu, TestFunction::power(1.0), TreePoint::on_ray(0, 1.0));
    FAIL("expected a domain-class error");
  } catch (const DomainClassError& e) {
    CHECK(e.flux() == doctest::Approx(1.0));
  }
  // Slopes +1 and -1 balance under equal weights.
  CHECK(origin_flux(mu, TestFunction::ray_linear({1.0, -1.0})) == 0.0);

  // The scale function is harmonic for the ray generator.
  const CoefficientField drifted({{RadialCoefficient::affine(-0.5, -0.3), constant(1.2)}});
  const ScaleTransform st(drifted, RadialGrid{});
  const double h = 1e-4;
  TestFunction s;
  s.value = [&](std::size_t, double r) { return st.scale(0, r); };
  s.d1 = [&](std::size_t, double r) { return st.derivative(0, r); };
  s.d2 = [&](std::size_t, double r) { return (st.derivative(0, r + h) - st.derivative(0, r - h)) / (2 * h); };
  for (double r : {0.5, 1.0, 2.0, 3.0})
    CHECK(std::abs(ray_generator(drifted, 0, s, r)) < 1e-6 * st.derivative(0, r));
}

TEST_CASE("lyapunov rates: examples, closed forms and envelope monotonicity") {
  const LyapunovGrid grid = LyapunovGrid::defaults();
  const LyapunovReport a = lyapunov_optimize(constant(-1.0), constant(1.0), grid);
  CHECK(a.certified);
  CHECK(a.lambda_star == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a.k == doctest::Approx(0.5).epsilon(1e-6));
  const LyapunovReport b = lyapunov_optimize(constant(-2.0), constant(1.0), grid);
  CHECK(b.lambda_star == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(b.k == doctest::Approx(2.0).epsilon(1e-6));
  for (std::size_t i = 0; i < b.xs.size(); ++i) REQUIRE(b.K_curve[i] <= -b.k + 1e-9);

  const CoefficientField bang({{constant(-1.0), constant(1.0)}, {constant(-2.0), constant(1.0)}});
  const LyapunovReport c = lyapunov_for_field(bang, grid);
  CHECK(c.mode == LyapunovMode::bang_bang);
  CHECK(c.lambda_star == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(c.k == doctest::Approx(0.5).epsilon(1e-6));

  CHECK_FALSE(lyapunov_optimize(constant(1.0), constant(1.0), grid).certified);

  Draws d(4);
  for (int trial = 0; trial < 10; ++trial) {
    const double a0 = d.uniform(-1.5, -0.2), slope = d.uniform(-1.0, 0.0), s = d.uniform(0.5, 1.5);
    const CoefficientField f({{RadialCoefficient::affine(a0, slope), constant(s)}, {constant(a0 - 0.3), constant(s)}});
    const LyapunovReport rep = lyapunov_for_field(f, grid);
    double gsup = -std::numeric_limits<double>::infinity();  // constant envelope on the sampled x
    for (double x : grid.xs) gsup = std::max({gsup, a0 + slope * x, a0 - 0.3});
    const double closed = gsup * gsup / (2.0 * s * s);
    CHECK(rep.k <= closed + 1e-9);
  }
}
