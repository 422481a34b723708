#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace walsh {

/// A ray direction: an integer id plus its unit embedding in R^d.
struct Direction {
  int id = 0;
  std::vector<double> embedding;

  /// Planar direction at `angle` radians.
  static Direction from_angle(int id, double angle);
  /// Arbitrary-dimension direction; the vector is normalized, zero vectors rejected.
  static Direction from_vector(int id, std::vector<double> v);
};

/// Point of the spider in polar form. The origin is canonical: ray ==
/// kOrigin exactly when radius == 0, so equality of points is field equality.
/// `ray` holds the atom *index* within the owning SpinningMeasure.
struct TreePoint {
  static constexpr int kOrigin = -1;

  int ray = kOrigin;
  double radius = 0.0;

  static TreePoint origin() { return {}; }
  /// radius == 0 collapses to the origin; negative radius is rejected.
  static TreePoint on_ray(int ray_index, double radius);

  bool is_origin() const { return ray == kOrigin; }
  friend bool operator==(const TreePoint&, const TreePoint&) = default;
};

/// Railway distance: along a shared ray |r1 - r2|, otherwise through the origin.
double tree_distance(const TreePoint& a, const TreePoint& b);

/// Euclidean distance between the embedded points r * theta.
double embedded_distance(const TreePoint& a, const TreePoint& b,
                         std::span<const Direction> directions);

struct Atom {
  Direction direction;
  double weight = 0.0;
};

/// Finitely supported probability measure on the unit sphere.
class SpinningMeasure {
 public:
  /// Validates: at least one atom, positive weights summing to 1 +- 1e-12,
  /// distinct ids, unit embeddings of one common dimension.
  explicit SpinningMeasure(std::vector<Atom> atoms);

  /// Weights on `n` planar rays at angles 2*pi*i/n.
  static SpinningMeasure planar(std::span<const double> weights);
  static SpinningMeasure dirac(const Direction& d);

  std::size_t size() const { return atoms_.size(); }
  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  std::span<const Atom> atoms() const { return atoms_; }
  double weight(std::size_t i) const { return atoms_[i].weight; }
  std::vector<Direction> directions() const;
  std::size_t dimension() const { return atoms_.front().direction.embedding.size(); }

  /// Index of the atom with `id`; throws DomainError when absent.
  std::size_t index_of(int id) const;

  /// Atom index for a uniform variate u in (0, 1) by inversion.
  std::size_t sample(double u) const;

  /// Mass of the atoms whose indices are flagged in `member`.
  double mass(const std::vector<bool>& member) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

/// Euclidean chord length between two atom embeddings.
double chord_distance(const Direction& a, const Direction& b);

/// Joint distribution over atom pairs (i of the first measure, j of the second).
class CouplingPlan {
 public:
  CouplingPlan(std::size_t rows, std::size_t cols, std::vector<double> joint);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t i, std::size_t j) const { return joint_[i * cols_ + j]; }
  std::span<const double> joint() const { return joint_; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  /// Pair (i, j) for a uniform variate, by inversion over row-major cells.
  std::pair<std::size_t, std::size_t> sample(double u) const;

  /// Expected chord^p cost under this plan.
  double cost(const SpinningMeasure& first, const SpinningMeasure& second, double p) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> joint_;
  std::vector<double> cumulative_;
};

enum class PlanKind { independent, identity, optimal };

/// independent: product measure. identity: diagonal, requires the measures to
/// agree atom-for-atom. optimal: a plan attaining wasserstein_p for `p`.
CouplingPlan build_coupling_plan(const SpinningMeasure& first, const SpinningMeasure& second,
                                 PlanKind kind, double p = 1.0);

/// Exact optimal transport with chord^p cost; returns the p-th root of the
/// minimal expected cost. p < 1 is rejected.
double wasserstein_p(const SpinningMeasure& first, const SpinningMeasure& second, double p);

/// Result of the transportation simplex on an explicit cost matrix.
struct TransportSolution {
  std::vector<double> flow;  // rows x cols, row-major
  double cost = 0.0;
};

/// Minimum-cost transport between `supply` and `demand` (equal totals) with
/// row-major `cost`. Transportation simplex from the north-west corner with
/// Bland's pivoting rule, so the returned basis is deterministic.
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace walsh
