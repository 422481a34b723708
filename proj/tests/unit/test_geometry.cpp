#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "support.hpp"
#include "walsh/error.hpp"
#include "walsh/geometry.hpp"

using namespace walsh;
using testing::Draws;

namespace {

const double kPi = std::numbers::pi;

Direction north(int id = 0) { return Direction::from_angle(id, kPi / 2); }
Direction south(int id = 1) { return Direction::from_angle(id, -kPi / 2); }

// Random composition of 8 into k positive parts.
std::vector<int> eighths(Draws& d, int k) {
  std::vector<int> parts(k, 1);
  for (int left = 8 - k; left > 0; --left) ++parts[d.integer(0, k - 1)];
  return parts;
}

}  // namespace

TEST_CASE("tree distance examples") {
  CHECK(tree_distance(TreePoint::on_ray(0, 2), TreePoint::on_ray(0, 5)) == 3.0);
  CHECK(tree_distance(TreePoint::on_ray(0, 1), TreePoint::on_ray(1, 2)) == 3.0);
  CHECK(tree_distance(TreePoint::origin(), TreePoint::on_ray(1, 4)) == 4.0);
  CHECK(TreePoint::on_ray(3, 0.0) == TreePoint::origin());
  CHECK_THROWS_AS(TreePoint::on_ray(0, -1.0), DomainError);
}

TEST_CASE("tree distance is a metric dominating the embedded distance") {
  Draws d(11);
  const SpinningMeasure mu = testing::planar({0.25, 0.25, 0.25, 0.25});
  const auto dirs = mu.directions();
  auto point = [&] {
    if (d.uniform() < 0.1) return TreePoint::origin();
    return TreePoint::on_ray(d.integer(0, 3), d.uniform(0.0, 5.0));
  };
  for (int k = 0; k < 10000; ++k) {
    const TreePoint a = point(), b = point(), c = point();
    const double ab = tree_distance(a, b);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab == tree_distance(b, a));
    REQUIRE((ab == 0.0) == (a == b));
    REQUIRE(tree_distance(a, c) <= ab + tree_distance(b, c) + 1e-12);
    REQUIRE(embedded_distance(a, b, dirs) <= ab + 1e-12);
  }
}

TEST_CASE("directions and spinning measure validation") {
  const Direction v = Direction::from_vector(0, {3.0, 4.0, 0.0});
  CHECK(v.embedding[0] == doctest::Approx(0.6));
  CHECK(v.embedding[1] == doctest::Approx(0.8));
  CHECK_THROWS_AS(Direction::from_vector(0, {0.0, 0.0}), DomainError);

  CHECK_THROWS_AS(SpinningMeasure({}), DomainError);
  CHECK_THROWS_AS(SpinningMeasure({{north(0), 0.5}, {south(1), 0.4}}), DomainError);
  CHECK_THROWS_AS(SpinningMeasure({{north(0), 1.2}, {south(1), -0.2}}), DomainError);
  CHECK_THROWS_AS(SpinningMeasure({{north(0), 0.5}, {south(0), 0.5}}), DomainError);
  CHECK_THROWS_AS(SpinningMeasure({{north(0), 0.5}, {Direction::from_vector(1, {0, 0, 1}), 0.5}}),
                  DomainError);

  const SpinningMeasure mu = testing::planar({0.5, 0.3, 0.2});
  CHECK(mu.atom(1).direction.embedding[0] == doctest::Approx(std::cos(2 * kPi / 3)));
  CHECK(mu.index_of(2) == 2);
  CHECK_THROWS_AS(mu.index_of(9), DomainError);
  CHECK(mu.sample(0.49) == 0);
  CHECK(mu.sample(0.51) == 1);
  CHECK(mu.sample(0.99) == 2);
  CHECK(mu.mass({true, false, true}) == doctest::Approx(0.7));
}

TEST_CASE("wasserstein examples") {
  const SpinningMeasure n = SpinningMeasure::dirac(north(0));
  const SpinningMeasure s = SpinningMeasure::dirac(south(0));
  CHECK(wasserstein_p(n, n, 2.0) == 0.0);
  CHECK(wasserstein_p(n, s, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  const SpinningMeasure half({{north(0), 0.5}, {south(1), 0.5}});
  CHECK(wasserstein_p(half, n, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(wasserstein_p(n, s, 0.5), DomainError);
}

TEST_CASE("coupling plan examples") {
  const SpinningMeasure two = testing::planar({0.5, 0.5});
  const CouplingPlan ind = build_coupling_plan(two, two, PlanKind::independent);
  for (double m : ind.joint()) CHECK(m == 0.25);

  const SpinningMeasure mu = testing::planar({0.3, 0.7});
  const CouplingPlan id = build_coupling_plan(mu, mu, PlanKind::identity);
  CHECK(id.at(0, 0) == 0.3);
  CHECK(id.at(1, 1) == 0.7);
  CHECK(id.at(0, 1) == 0.0);
  CHECK(id.at(1, 0) == 0.0);
  CHECK_THROWS_AS(build_coupling_plan(mu, two, PlanKind::identity), DomainError);

  const SpinningMeasure half({{north(0), 0.5}, {south(1), 0.5}});
  const SpinningMeasure n = SpinningMeasure::dirac(north(0));
  const CouplingPlan opt = build_coupling_plan(half, n, PlanKind::optimal, 1.0);
  CHECK(opt.at(0, 0) == doctest::Approx(0.5));
  CHECK(opt.at(1, 0) == doctest::Approx(0.5));
  CHECK(opt.cost(half, n, 1.0) == doctest::Approx(1.0));

  CHECK(opt.sample(0.25) == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(opt.sample(0.75) == std::pair<std::size_t, std::size_t>{1, 0});
}

TEST_CASE("optimal transport matches brute-force enumeration on small measures") {
  Draws d(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = d.integer(1, 3), n = d.integer(1, 3);
    const auto rw = eighths(d, m), cw = eighths(d, n);
    std::vector<Atom> a, b;
    for (int i = 0; i < m; ++i) a.push_back({Direction::from_angle(i, d.uniform(0, 2 * kPi)), rw[i] / 8.0});
    for (int j = 0; j < n; ++j) b.push_back({Direction::from_angle(j, d.uniform(0, 2 * kPi)), cw[j] / 8.0});
    const SpinningMeasure first(a), second(b);
    const double p = std::array{1.0, 1.5, 2.0}[trial % 3];
    std::vector<double> cost;
    for (const Atom& x : a)
      for (const Atom& y : b) cost.push_back(std::pow(chord_distance(x.direction, y.direction), p));
    const double oracle = testing::brute_force_transport(rw, cw, cost);
    REQUIRE(std::pow(wasserstein_p(first, second, p), p) == doctest::Approx(oracle).epsilon(1e-12));
    const CouplingPlan plan = build_coupling_plan(first, second, PlanKind::optimal, p);
    REQUIRE(plan.cost(first, second, p) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("every plan has the declared marginals; W_p is symmetric and vanishes on the diagonal") {
  Draws d(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto random_measure = [&](int k) {
      std::vector<double> w(k);
      double total = 0.0;
      for (double& x : w) total += (x = d.uniform(0.05, 1.0));
      std::vector<Atom> atoms;
      double acc = 0.0;
      for (int i = 0; i < k; ++i) {
        const double wi = i + 1 < k ? w[i] / total : 1.0 - acc;
        acc += wi;
        atoms.push_back({Direction::from_angle(i, d.uniform(0, 2 * kPi)), wi});
      }
      return SpinningMeasure(atoms);
    };
    const SpinningMeasure a = random_measure(d.integer(1, 6)), b = random_measure(d.integer(1, 6));
    for (PlanKind kind : {PlanKind::independent, PlanKind::optimal}) {
      const CouplingPlan plan = build_coupling_plan(a, b, kind, 2.0);
      const auto rows = plan.row_sums(), cols = plan.col_sums();
      for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(rows[i] - a.weight(i)) <= 1e-10);
      for (std::size_t j = 0; j < b.size(); ++j) REQUIRE(std::abs(cols[j] - b.weight(j)) <= 1e-10);
      for (double x : plan.joint()) REQUIRE(x >= 0.0);
    }
    REQUIRE(wasserstein_p(a, a, 2.0) <= 1e-7);
    REQUIRE(wasserstein_p(a, b, 2.0) == doctest::Approx(wasserstein_p(b, a, 2.0)).epsilon(1e-10));
  }
}

TEST_CASE("transport solver is deterministic under ties") {
  const std::vector<double> supply{0.5, 0.5}, demand{0.5, 0.5}, cost{1, 1, 1, 1};
  const TransportSolution a = solve_transport(supply, demand, cost);
  const TransportSolution b = solve_transport(supply, demand, cost);
  CHECK(a.flow == b.flow);
  CHECK(a.cost == doctest::Approx(1.0));
}
