#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

#include "support.hpp"
#include "walsh/analysis.hpp"
#include "walsh/ensemble.hpp"
#include "walsh/error.hpp"

using namespace walsh;
using testing::constant;
using testing::Draws;

namespace {

SimConfig config(double horizon, double dt, std::uint64_t seed, std::size_t paths = 1) {
  SimConfig c;
  c.horizon = horizon;
  c.dt = dt;
  c.seed = seed;
  c.path_count = paths;
  return c;
}

SpiderHistogram random_histogram(Draws& d, const SpiderBinning& b) {
  std::vector<double> m(b.cell_count());
  double total = 0.0;
  for (double& x : m) total += (x = d.uniform() < 0.2 ? 0.0 : d.uniform());
  for (double& x : m) x /= total;
  return reference_histogram(b, m);
}

}  // namespace

TEST_CASE("spider histograms") {
  const SpiderBinning b = SpiderBinning::equal_width(2, 4.0, 4);
  CHECK(b.cell_count() == 9);
  CHECK(b.cell_of(TreePoint::origin()) == 0);
  CHECK(b.ray_of(0) == -1);
  CHECK(b.ray_of(b.cell_of(TreePoint::on_ray(1, 0.5))) == 1);
  CHECK(std::isinf(b.upper_edge(b.cell_of(TreePoint::on_ray(1, 100.0)))));

  const std::vector<TreePoint> one{TreePoint::on_ray(0, 1.0)};
  const SpiderHistogram h = spider_histogram(one, b);
  CHECK(h.masses[b.cell_of(one[0])] == 1.0);
  CHECK(std::accumulate(h.masses.begin(), h.masses.end(), 0.0) == 1.0);
  CHECK_THROWS_AS(spider_histogram(std::vector<TreePoint>{TreePoint::on_ray(5, 1.0)}, b), DomainError);
  CHECK_THROWS_AS(spider_histogram(std::vector<TreePoint>{}, b), DomainError);
  CHECK_THROWS_AS(SpiderBinning(std::vector<std::vector<double>>{{0.0, 1.0, 1.0}}), DomainError);

  Draws d(1);
  std::vector<TreePoint> pts;
  for (int k = 0; k < 1000; ++k) pts.push_back(TreePoint::on_ray(d.integer(0, 1), d.uniform(0, 6)));
  const SpiderHistogram many = spider_histogram(pts, b);
  CHECK(std::accumulate(many.masses.begin(), many.masses.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stationary sampler reproduces the analytic cell masses") {
  const CoefficientField field({{constant(-1.0), constant(1.0)}, {constant(-2.0), constant(1.5)}});
  const SpinningMeasure mu = testing::planar({0.4, 0.6});
  const StationaryProfile profile(field, mu, RadialGrid{});
  const SpiderBinning b = SpiderBinning::equal_probability(profile, 40);
  const std::vector<double> masses = b.masses_under(profile);
  CHECK(std::accumulate(masses.begin(), masses.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  const std::size_t n = 1000000;
  std::vector<TreePoint> pts(n);
  Stream s(77, 0, StreamTag::aux);
  for (TreePoint& x : pts) {
    const double u = s.uniform();
    x = profile.sample(u, s.uniform());
  }
  const SpiderHistogram h = spider_histogram(pts, b);
  double worst = 0.0;
  for (std::size_t c = 0; c < masses.size(); ++c) {
    if (masses[c] == 0.0) continue;
    const double se = std::sqrt(masses[c] * (1 - masses[c]) / n);
    worst = std::max(worst, std::abs(h.masses[c] - masses[c]) / se);
  }
  CHECK(worst < 5.0);
}

TEST_CASE("total variation examples and metric properties") {
  const SpiderBinning b(std::vector<std::vector<double>>{{0.0}});  // origin cell plus one radial cell
  const SpiderHistogram half = reference_histogram(b, {0.5, 0.5});
  const SpiderHistogram full = reference_histogram(b, {1.0, 0.0});
  const SpiderHistogram other = reference_histogram(b, {0.0, 1.0});
  CHECK(tv_distance(half, half) == 0.0);
  CHECK(tv_distance(full, other) == 1.0);
  CHECK(tv_distance(half, full) == 0.5);
  CHECK_THROWS_AS(tv_distance(half, reference_histogram(SpiderBinning::equal_width(1, 1.0, 2), {0.2, 0.3, 0.5})),
                  DomainError);

  const SpiderBinning big = SpiderBinning::equal_width(3, 3.0, 5);
  Draws d(2);
  for (int k = 0; k < 2000; ++k) {
    const SpiderHistogram x = random_histogram(d, big), y = random_histogram(d, big), z = random_histogram(d, big);
    const double xy = tv_distance(x, y);
    REQUIRE(xy >= 0.0);
    REQUIRE(xy <= 1.0 + 1e-12);
    REQUIRE(xy == tv_distance(y, x));
    REQUIRE(tv_distance(x, z) <= xy + tv_distance(y, z) + 1e-12);
    const double w = tv_distance(x, y, 0.5);
    REQUIRE(w >= 2.0 * xy - 1e-12);  // V >= 1 and the weighted form has no 1/2
  }

  // Noise floor: expected TV of an N-sample from the cell law.
  const std::vector<double> m(40, 1.0 / 40.0);
  CHECK(tv_noise_floor(m, 50000) ==
        doctest::Approx(0.5 * 40 * std::sqrt(2.0 * (1.0 / 40) * (39.0 / 40) / (std::numbers::pi * 50000))));
}

TEST_CASE("occupation fractions") {
  const WalshPath single = simulate_walsh_diffusion(testing::uniform_field(1, -1.0, 1.0), testing::planar({1.0}),
                                                    TreePoint::on_ray(0, 1.0), config(10.0, 1e-3, 1), 0);
  const OccupationReport one = occupation_fractions(single, 1);
  CHECK(one.ray_fraction[0] + one.origin_fraction == doctest::Approx(1.0));
  CHECK(one.ray_fraction[0] > 0.99);

  const WalshPath sym = simulate_walsh_diffusion(testing::uniform_field(2, -1.0, 1.0), testing::planar({0.5, 0.5}),
                                                 TreePoint::origin(), config(500.0, 1e-3, 2), 0);
  const OccupationReport two = occupation_fractions(sym, 2);
  CHECK(std::abs(two.ray_fraction[0] - 0.5) <= 0.03);
  CHECK(std::abs(two.ray_fraction[1] - 0.5) <= 0.03);
}

TEST_CASE("decay rate fitting") {
  std::vector<double> t, v;
  for (int k = 1; k <= 6; ++k) {
    t.push_back(k);
    v.push_back(2.0 * std::exp(-0.5 * k));
  }
  const DecayFit fit = fit_decay_rate(t, v, 0.0);
  CHECK(fit.rate == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(fit.window_end - fit.window_begin == 6);

  const DecayFit cut = fit_decay_rate(t, v, v[4]);  // points at or below the floor are excluded
  CHECK(cut.window_end == 4);
  CHECK_THROWS_AS(fit_decay_rate(t, v, 10.0), FitRefused);
  CHECK_THROWS_AS(fit_decay_rate(t, v, v[3]), FitRefused);
}

TEST_CASE("coupling cost") {
  const std::vector<double> zeros(100, 0.0);
  CHECK(coupling_cost(zeros, 1.0).value == 0.0);

  // Triangle bound ||X - Xbar|| <= 2 S path by path.
  const SpinningMeasure n = SpinningMeasure::dirac(Direction::from_angle(0, 0.0));
  const SpinningMeasure mix({{Direction::from_angle(0, 0.0), 0.5}, {Direction::from_angle(1, 2.5), 0.5}});
  const CouplingPlan plan = build_coupling_plan(n, mix, PlanKind::independent);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const CoupledPaths c = simulate_coupled_walsh_bm(plan, config(1.0, 1e-3, 4), i);
    const double smax = std::max_element(c.first.states.begin(), c.first.states.end(),
                                         [](auto& a, auto& b) { return a.radius < b.radius; })->radius;
    CHECK(sup_distance(c, n, mix) <= 2.0 * smax + 1e-12);
  }
  const std::vector<double> xs{1.0, 2.0, 3.0};
  CHECK(coupling_cost(xs, 2.0).value == doctest::Approx(std::sqrt(14.0 / 3.0)));
}

TEST_CASE("hoelder constants") {
  CHECK(holder_c1(2.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(holder_rho(2.0, 1.0) == 0.4);
  CHECK_THROWS_AS(check_holder_admissible(2.0, 2.0, 0.4), DomainError);
  CHECK_THROWS_AS(check_holder_admissible(2.0, 0.5, 0.4), DomainError);
  CHECK_THROWS_AS(check_holder_admissible(2.0, 1.0, 0.7), DomainError);
  CHECK_NOTHROW(check_holder_admissible(2.0, 1.0, 0.6));
  CHECK(holder_constants(2.0, 1.0, 0.4, 1.0).admissible);
  CHECK_THROWS_AS(holder_constants(2.0, 2.0, 0.4, 1.0), DomainError);

  // Independent high-precision evaluation of the Gamma formula.
  using big = boost::multiprecision::cpp_bin_float_50;
  Draws d(3);
  for (int k = 0; k < 50; ++k) {
    const double p = d.uniform(1.2, 6.0), q = d.uniform(1.0, p - 0.1), T = d.uniform(0.1, 10.0);
    const big r1 = big(p) / (big(p) - big(q));
    const big c1 = pow(2 * big(T), big(q) / 2) * pow(boost::math::constants::pi<big>(), -1 / (2 * r1)) *
                   pow(boost::math::tgamma((1 + big(q) * r1) / 2), 1 / r1);
    REQUIRE(holder_c1(p, q, T) == doctest::Approx(static_cast<double>(c1)).epsilon(1e-10));
  }
}

TEST_CASE("hoelder bound verdict") {
  const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
  std::vector<double> w;
  std::vector<Estimate> cost;
  for (double e : eps) {
    w.push_back(2.0 * std::sqrt(e));
    cost.push_back({1.3 * std::pow(2.0 * std::sqrt(e), 0.8), 0.01});
  }
  const HolderReport ok = holder_bound_check(2.0, 1.0, 0.4, 1.0, eps, w, cost);
  CHECK(ok.monotone);
  CHECK(ok.loglog.slope == doctest::Approx(0.8));
  CHECK(ok.pass);

  std::vector<Estimate> flat(4, Estimate{0.5, 0.01});
  CHECK_FALSE(holder_bound_check(2.0, 1.0, 0.4, 1.0, eps, w, flat).pass);
  CHECK_THROWS_AS(holder_bound_check(2.0, 2.0, 0.4, 1.0, eps, w, cost), DomainError);
}

TEST_CASE("local-time partition check") {
  const SpinningMeasure mu = testing::planar({0.3, 0.7});
  const std::vector<std::vector<bool>> subsets{{true, true}, {false, false}, {true, false}};
  const LocalTimeTotals lt = walsh_bm_local_times(mu, subsets, config(10.0, 1e-4, 5, 40), Execution::parallel);
  const auto r = partition_of_local_time_check(lt.total, lt.split, mu, subsets);
  CHECK(r[0].ratio == 1.0);
  CHECK(r[0].status == CheckStatus::pass);
  CHECK(r[1].ratio == 0.0);
  CHECK(r[1].status == CheckStatus::pass);
  CHECK(r[2].mass == doctest::Approx(0.3));

  const std::vector<double> zeros(10, 0.0);
  const auto degenerate = partition_of_local_time_check(zeros, {zeros}, mu, {{true, false}});
  CHECK(degenerate[0].status == CheckStatus::inconclusive);
}

TEST_CASE("generator consistency") {
  const CoefficientField field = testing::uniform_field(2, -1.0, 1.0);
  const SpinningMeasure mu = testing::planar({0.5, 0.5});
  const std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
  const GeneratorReport interior =
      generator_consistency_check(field, mu, TestFunction::power(2.0), TreePoint::on_ray(0, 1.0), hs, 50000, 3);
  CHECK(interior.generator == doctest::Approx(-1.0));
  CHECK(interior.order == 1.0);
  CHECK(interior.status == CheckStatus::pass);

  const GeneratorReport constant_f =
      generator_consistency_check(field, mu, TestFunction::constant(2.0), TreePoint::on_ray(0, 1.0), hs, 100, 3);
  for (const auto& p : constant_f.points) CHECK(p.estimate == 0.0);

  const GeneratorReport origin =
      generator_consistency_check(field, mu, TestFunction::power(2.0), TreePoint::origin(), hs, 50000, 4);
  CHECK(origin.generator == doctest::Approx(1.0));
  CHECK(origin.order == 0.5);
  CHECK(origin.status == CheckStatus::pass);

  CHECK_THROWS_AS(generator_consistency_check(field, mu, TestFunction::power(1.0), TreePoint::origin(), hs, 100, 3),
                  DomainClassError);
}

TEST_CASE("goodness-of-fit statistics") {
  CHECK(chi_square_survival(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_survival(0.0, 3) == 1.0);
  const std::vector<double> obs{25, 25, 50}, probs{0.25, 0.25, 0.5};
  const ChiSquare exact = chi_square_test(obs, probs);
  CHECK(exact.statistic == 0.0);
  CHECK(exact.dof == 2);

  // Poisson(4) draws by inversion.
  Stream s(5, 0, StreamTag::aux);
  std::vector<std::size_t> draws;
  for (int i = 0; i < 20000; ++i) {
    double u = s.uniform(), p = std::exp(-4.0), c = p;
    std::size_t k = 0;
    while (u > c) {
      p *= 4.0 / static_cast<double>(++k);
      c += p;
    }
    draws.push_back(k);
  }
  CHECK(poisson_chi_square(draws, 4.0).p_value > 0.01);
  CHECK(poisson_chi_square(draws, 3.0).p_value < 1e-6);

  std::vector<double> a, b;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(s.normal());
    b.push_back(s.normal() + 0.3);
  }
  const KolmogorovSmirnov same = ks_two_sample(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  CHECK(ks_two_sample(a, b).p_value < 1e-6);
}
