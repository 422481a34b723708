#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "walsh/geometry.hpp"
#include "walsh/model.hpp"
#include "walsh/rng.hpp"

namespace walsh {

struct SimConfig {
  double horizon = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  std::size_t path_count = 1;
  double local_time_epsilon = 0.02;

  /// Number of Euler steps covering [0, horizon].
  std::size_t steps() const;
  /// Grid index of time t (nearest node).
  std::size_t index_of(double t) const;
  /// Checks horizon, step and path count.
  void validate() const;
  /// Additionally checks the local-time shell: epsilon in (0, 1), epsilon >= sqrt(dt).
  void validate_local_time() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct Explosion {
  double time;
  int ray;
};

/// Sampled Walsh path on a uniform grid. `excursion[k]` is 0 when the state is
/// the origin and otherwise the id of the excursion the node belongs to; ids
/// increase with time and every node of one excursion carries the same ray.
/// `origin_hit[k]` marks zero-set nodes: the step into node k crossed the
/// origin (or the path starts there), after which the radius was reflected.
struct WalshPath {
  double dt = 0.0;
  std::vector<TreePoint> states;
  std::vector<std::uint32_t> excursion;
  std::vector<std::uint8_t> origin_hit;
  std::vector<double> increments;  // driving Brownian increments, one per step
  std::optional<Explosion> explosion;

  std::size_t size() const { return states.size(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  double radius(std::size_t k) const { return states[k].radius; }
};

/// Reflected one-dimensional path (the radial part only).
struct RadialPath {
  double dt = 0.0;
  std::vector<double> radius;
  std::vector<std::uint8_t> origin_hit;
};

struct CoupledPaths {
  WalshPath first;
  WalshPath second;
  double tau = kInfinity;  // coupling time, infinity when not reached by the horizon
};

/// One Euler step at a time for a Walsh diffusion: Euler-Maruyama on the
/// current ray, full reflection r <- |r| when the step ends at r <= 0, and a
/// fresh ray drawn from mu for the new excursion. The normal variate is
/// supplied by the caller so several steppers can share one noise.
class WalshStepper {
 public:
  WalshStepper(const CoefficientField& field, const SpinningMeasure& mu, const TreePoint& x0,
               double dt, Stream rays);

  /// Advances one step. Returns false once the path has left a finite domain
  /// (the state then stays at the last in-domain value).
  bool step(double z);

  const TreePoint& state() const { return state_; }
  bool crossed() const { return crossed_; }
  std::uint32_t excursion() const { return state_.is_origin() ? 0 : excursion_; }
  bool exploded() const { return exploded_; }
  int exploded_ray() const { return exploded_ray_; }
  std::size_t step_index() const { return step_; }

 private:
  const CoefficientField* field_;
  const SpinningMeasure* mu_;
  double dt_;
  double sqrt_dt_;
  Stream rays_;
  TreePoint state_;
  std::uint32_t excursion_;
  std::size_t step_ = 0;
  bool crossed_;
  bool exploded_ = false;
  int exploded_ray_ = -1;
};

/// Full-reflection Euler scheme for a single radial SDE.
RadialPath simulate_reflected_radial(const RadialCoefficient& drift,
                                     const RadialCoefficient& dispersion, double r0,
                                     const SimConfig& cfg, std::uint64_t path = 0);

/// Walsh Brownian motion from the origin: reflected BM with one ray per excursion.
WalshPath simulate_walsh_bm(const SpinningMeasure& mu, const SimConfig& cfg,
                            std::uint64_t path = 0);

/// Walsh diffusion from x0. A path leaving a finite domain is truncated at the
/// last in-domain node and carries the explosion record.
WalshPath simulate_walsh_diffusion(const CoefficientField& field, const SpinningMeasure& mu,
                                   const TreePoint& x0, const SimConfig& cfg,
                                   std::uint64_t path = 0);

/// Shared reflected BM, one (first, second) ray pair per excursion drawn from
/// the plan. Rays of `first` index the plan rows, rays of `second` its columns.
CoupledPaths simulate_coupled_walsh_bm(const CouplingPlan& plan, const SimConfig& cfg,
                                       std::uint64_t path = 0);

/// Two Walsh diffusions driven by the same noise with independent ray draws.
/// tau is the first node at which both cross the origin in the same step;
/// from there on the second path copies the first.
CoupledPaths simulate_coupled_diffusions(const CoefficientField& field,
                                         const SpinningMeasure& mu, const TreePoint& x1,
                                         const TreePoint& x2, const SimConfig& cfg,
                                         std::uint64_t path = 0);

/// Sup over the grid of the embedded distance between the two legs.
double sup_distance(const CoupledPaths& pair, const SpinningMeasure& first,
                    const SpinningMeasure& second);

struct TransformedPath {
  WalshPath scaled;             // radius replaced by s_i(r) on each ray
  std::vector<double> clock;    // T(t) = int_0^t sigma^2(X), empty for drifted fields
};

/// Scale-maps the path ray by ray; the time change is added when the field is driftless.
TransformedPath time_change_and_scale(const WalshPath& path, const CoefficientField& field,
                                      const RadialGrid& grid = {});

/// Trapezoid clock T(t) = int_0^t sigma^2(X(s)) ds. Rejects drifted fields.
std::vector<double> time_change(const WalshPath& path, const CoefficientField& field);

struct LocalTimeEstimate {
  double epsilon = 0.0;
  std::vector<double> total;  // Lambda(t_k)
  std::vector<double> split;  // accumulated only while on a ray of the set
};

/// Lambda(t) ~ (1/(2 eps)) sum 1{0 < ||X|| < eps} sigma^2(X) dt.
LocalTimeEstimate estimate_local_time(const WalshPath& path, const CoefficientField& field,
                                      const std::vector<bool>& ray_set, double epsilon);

struct Excursion {
  std::size_t begin;  // first node with positive radius
  std::size_t end;    // one past the last node
  double height;
  bool complete;      // false for the meander at the horizon
};

struct ExcursionStats {
  std::vector<Excursion> excursions;
  std::size_t high_count = 0;           // delta-high excursions before local time ell
  std::optional<std::size_t> ell_node;  // first node with Lambda >= ell
};

/// Splits the grid into excursions (runs between zero-set nodes) and counts the
/// delta-high ones completed before the local-time estimate reaches ell. The
/// meander at the horizon counts when its running max exceeds delta.
ExcursionStats excursion_decomposition(const RadialPath& path, double delta, double ell,
                                       double epsilon);

/// Number of excursions of reflected BM with height >= delta before its local
/// time at 0 reaches ell, via S = M - W with local time M. Excursions are cut
/// once they reach delta and grid extrema use Brownian-bridge corrections.
std::size_t sample_high_excursion_count(double ell, double delta, double dt, std::uint64_t seed,
                                        std::uint64_t path);

/// CSV export (t, ray, radius, excursion_id) keeping every `thin`-th node.
void write_path_csv(std::ostream& out, const WalshPath& path, const SpinningMeasure& mu,
                    std::size_t thin = 1);

}  // namespace walsh
