#include "walsh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <set>

#include "walsh/error.hpp"

namespace walsh {

Direction Direction::from_angle(int id, double angle) {
  return Direction{id, {std::cos(angle), std::sin(angle)}};
}

Direction Direction::from_vector(int id, std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (v.empty() || !(norm > 0.0) || !std::isfinite(norm))
    throw DomainError("direction " + std::to_string(id) + " has no usable embedding");
  for (double& x : v) x /= norm;
  return Direction{id, std::move(v)};
}

TreePoint TreePoint::on_ray(int ray_index, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw DomainError("tree point radius must be finite and nonnegative");
  if (radius == 0.0) return origin();
  if (ray_index < 0) throw DomainError("tree point away from the origin needs a ray");
  return TreePoint{ray_index, radius};
}

double tree_distance(const TreePoint& a, const TreePoint& b) {
  if (a.is_origin()) return b.radius;
  if (b.is_origin()) return a.radius;
  if (a.ray == b.ray) return std::abs(a.radius - b.radius);
  return a.radius + b.radius;
}

double embedded_distance(const TreePoint& a, const TreePoint& b,
                         std::span<const Direction> directions) {
  const std::size_t dim = directions.front().embedding.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double xa = a.is_origin() ? 0.0 : a.radius * directions[a.ray].embedding[k];
    const double xb = b.is_origin() ? 0.0 : b.radius * directions[b.ray].embedding[k];
    sum += (xa - xb) * (xa - xb);
  }
  return std::sqrt(sum);
}

double chord_distance(const Direction& a, const Direction& b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.embedding.size(); ++k) {
    const double d = a.embedding[k] - b.embedding[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

SpinningMeasure::SpinningMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("spinning measure needs at least one atom");
  const std::size_t dim = atoms_.front().direction.embedding.size();
  std::set<int> ids;
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight))
      throw DomainError("atom " + std::to_string(a.direction.id) + " has nonpositive weight");
    if (!ids.insert(a.direction.id).second)
      throw DomainError("duplicate atom id " + std::to_string(a.direction.id));
    if (a.direction.embedding.size() != dim || dim == 0)
      throw DomainError("atom embeddings must share one dimension");
    double norm2 = 0.0;
    for (double x : a.direction.embedding) norm2 += x * x;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
      throw DomainError("atom " + std::to_string(a.direction.id) + " embedding is not a unit vector");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DomainError("spinning measure weights sum to " + std::to_string(total) + ", not 1");
  double acc = 0.0;
  for (const Atom& a : atoms_) cumulative_.push_back(acc += a.weight);
  cumulative_.back() = 1.0;
}

SpinningMeasure SpinningMeasure::planar(std::span<const double> weights) {
  std::vector<Atom> atoms;
  const double n = static_cast<double>(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
    atoms.push_back({Direction::from_angle(static_cast<int>(i), angle), weights[i]});
  }
  return SpinningMeasure(std::move(atoms));
}

SpinningMeasure SpinningMeasure::dirac(const Direction& d) {
  return SpinningMeasure({Atom{d, 1.0}});
}

std::vector<Direction> SpinningMeasure::directions() const {
  std::vector<Direction> out;
  out.reserve(atoms_.size());
  for (const Atom& a : atoms_) out.push_back(a.direction);
  return out;
}

std::size_t SpinningMeasure::index_of(int id) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atoms_[i].direction.id == id) return i;
  throw DomainError("no atom with id " + std::to_string(id));
}

std::size_t SpinningMeasure::sample(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                               atoms_.size() - 1);
}

double SpinningMeasure::mass(const std::vector<bool>& member) const {
  double m = 0.0;
  for (std::size_t i = 0; i < atoms_.size() && i < member.size(); ++i)
    if (member[i]) m += atoms_[i].weight;
  return m;
}

// ---------------------------------------------------------------------------

CouplingPlan::CouplingPlan(std::size_t rows, std::size_t cols, std::vector<double> joint)
    : rows_(rows), cols_(cols), joint_(std::move(joint)) {
  if (joint_.size() != rows_ * cols_ || rows_ == 0 || cols_ == 0)
    throw DomainError("coupling plan shape mismatch");
  double total = 0.0;
  for (double& m : joint_) {
    if (m < 0.0) {
      if (m < -1e-12) throw DomainError("coupling plan has negative mass");
      m = 0.0;
    }
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-10) throw DomainError("coupling plan mass is not 1");
  cumulative_.resize(joint_.size());
  std::partial_sum(joint_.begin(), joint_.end(), cumulative_.begin());
}

std::vector<double> CouplingPlan::row_sums() const {
  std::vector<double> s(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s[i] += at(i, j);
  return s;
}

std::vector<double> CouplingPlan::col_sums() const {
  std::vector<double> s(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s[j] += at(i, j);
  return s;
}

std::pair<std::size_t, std::size_t> CouplingPlan::sample(double u) const {
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                        joint_.size() - 1);
  // Never return an empty cell (possible when u rounds onto a boundary).
  while (joint_[k] == 0.0 && k > 0) --k;
  return {k / cols_, k % cols_};
}

double CouplingPlan::cost(const SpinningMeasure& first, const SpinningMeasure& second,
                          double p) const {
  double c = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (at(i, j) > 0.0)
        c += at(i, j) *
             std::pow(chord_distance(first.atom(i).direction, second.atom(j).direction), p);
  return c;
}

// ---------------------------------------------------------------------------

namespace {

struct BasicCell {
  std::size_t i;
  std::size_t j;
  double flow;
};

std::vector<BasicCell> north_west_corner(std::span<const double> supply,
                                         std::span<const double> demand) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  std::vector<double> s(supply.begin(), supply.end());
  std::vector<double> d(demand.begin(), demand.end());
  std::vector<BasicCell> basis;
  std::size_t i = 0, j = 0;
  while (true) {
    const double f = std::max(0.0, std::min(s[i], d[j]));
    basis.push_back({i, j, f});
    s[i] -= f;
    d[j] -= f;
    if (i == m - 1 && j == n - 1) break;
    if (i == m - 1) {
      ++j;
    } else if (j == n - 1) {
      ++i;
    } else if (s[i] <= d[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return basis;
}

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (m == 0 || n == 0 || cost.size() != m * n) throw DomainError("transport shape mismatch");

  std::vector<BasicCell> basis = north_west_corner(supply, demand);
  double cost_scale = 1.0;
  for (double c : cost) cost_scale = std::max(cost_scale, std::abs(c));
  const double tol = 1e-12 * cost_scale;

  const std::size_t nodes = m + n;
  std::vector<double> potential(nodes);
  std::vector<bool> known(nodes);
  std::vector<std::vector<std::size_t>> adjacent(nodes);  // basis cell indices

  const std::size_t max_iterations = 1000 * (m * n + 10);
  for (std::size_t iteration = 0;; ++iteration) {
    if (iteration > max_iterations) throw NumericError("transport simplex did not terminate");
    for (auto& a : adjacent) a.clear();
    for (std::size_t b = 0; b < basis.size(); ++b) {
      adjacent[basis[b].i].push_back(b);
      adjacent[m + basis[b].j].push_back(b);
    }
    // Potentials: u_i + v_j = c_ij on the spanning tree, u_0 = 0.
    std::fill(known.begin(), known.end(), false);
    potential[0] = 0.0;
    known[0] = true;
    std::queue<std::size_t> frontier;
    frontier.push(0);
    while (!frontier.empty()) {
      const std::size_t node = frontier.front();
      frontier.pop();
      for (std::size_t b : adjacent[node]) {
        const std::size_t other = node < m ? m + basis[b].j : basis[b].i;
        if (known[other]) continue;
        potential[other] = cost[basis[b].i * n + basis[b].j] - potential[node];
        known[other] = true;
        frontier.push(other);
      }
    }

    // Bland: first cell in row-major order with negative reduced cost.
    std::size_t enter_i = m, enter_j = n;
    for (std::size_t i = 0; i < m && enter_i == m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (cost[i * n + j] - potential[i] - potential[m + j] < -tol) {
          enter_i = i;
          enter_j = j;
          break;
        }
    if (enter_i == m) break;

    // Tree path from column node back to the row node.
    std::vector<std::size_t> parent_cell(nodes, basis.size());
    std::vector<std::size_t> parent_node(nodes, nodes);
    std::vector<bool> seen(nodes, false);
    const std::size_t start = m + enter_j;
    seen[start] = true;
    frontier.push(start);
    while (!frontier.empty()) {
      const std::size_t node = frontier.front();
      frontier.pop();
      for (std::size_t b : adjacent[node]) {
        const std::size_t other = node < m ? m + basis[b].j : basis[b].i;
        if (seen[other]) continue;
        seen[other] = true;
        parent_cell[other] = b;
        parent_node[other] = node;
        frontier.push(other);
      }
    }
    std::vector<std::size_t> path;  // cells ordered from the row end
    for (std::size_t node = enter_i; node != start; node = parent_node[node])
      path.push_back(parent_cell[node]);
    std::reverse(path.begin(), path.end());  // now ordered from the column end
    // Cells at even positions lose flow.
    std::size_t leave = basis.size();
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const BasicCell& c = basis[path[k]];
      const bool better = c.flow < theta ||
                          (c.flow == theta && std::make_pair(c.i, c.j) <
                                                  std::make_pair(basis[leave].i, basis[leave].j));
      if (better) {
        theta = c.flow;
        leave = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k)
      basis[path[k]].flow += (k % 2 == 0 ? -theta : theta);
    basis[leave] = BasicCell{enter_i, enter_j, theta};
  }

  TransportSolution out;
  out.flow.assign(m * n, 0.0);
  for (const BasicCell& c : basis) out.flow[c.i * n + c.j] += std::max(0.0, c.flow);
  for (std::size_t k = 0; k < m * n; ++k) out.cost += out.flow[k] * cost[k];
  return out;
}

namespace {

std::vector<double> chord_cost_matrix(const SpinningMeasure& first, const SpinningMeasure& second,
                                      double p) {
  std::vector<double> cost(first.size() * second.size());
  for (std::size_t i = 0; i < first.size(); ++i)
    for (std::size_t j = 0; j < second.size(); ++j)
      cost[i * second.size() + j] =
          std::pow(chord_distance(first.atom(i).direction, second.atom(j).direction), p);
  return cost;
}

std::vector<double> weights_of(const SpinningMeasure& mu) {
  std::vector<double> w;
  for (const Atom& a : mu.atoms()) w.push_back(a.weight);
  return w;
}

bool same_atoms(const SpinningMeasure& a, const SpinningMeasure& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.atom(i).direction.id != b.atom(i).direction.id) return false;
    if (std::abs(a.weight(i) - b.weight(i)) > 1e-12) return false;
    if (chord_distance(a.atom(i).direction, b.atom(i).direction) > 1e-12) return false;
  }
  return true;
}

}  // namespace

CouplingPlan build_coupling_plan(const SpinningMeasure& first, const SpinningMeasure& second,
                                 PlanKind kind, double p) {
  const std::size_t m = first.size();
  const std::size_t n = second.size();
  std::vector<double> joint(m * n, 0.0);
  switch (kind) {
    case PlanKind::independent:
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) joint[i * n + j] = first.weight(i) * second.weight(j);
      break;
    case PlanKind::identity:
      if (!same_atoms(first, second))
        throw DomainError("identity coupling requires identical spinning measures");
      for (std::size_t i = 0; i < m; ++i) joint[i * n + i] = first.weight(i);
      break;
    case PlanKind::optimal: {
      if (!(p >= 1.0)) throw DomainError("Wasserstein order p must be >= 1");
      const auto w1 = weights_of(first);
      const auto w2 = weights_of(second);
      joint = solve_transport(w1, w2, chord_cost_matrix(first, second, p)).flow;
      break;
    }
  }
  return CouplingPlan(m, n, std::move(joint));
}

double wasserstein_p(const SpinningMeasure& first, const SpinningMeasure& second, double p) {
  if (!(p >= 1.0)) throw DomainError("Wasserstein order p must be >= 1");
  const auto w1 = weights_of(first);
  const auto w2 = weights_of(second);
  const TransportSolution sol = solve_transport(w1, w2, chord_cost_matrix(first, second, p));
  return std::pow(std::max(0.0, sol.cost), 1.0 / p);
}

}  // namespace walsh
