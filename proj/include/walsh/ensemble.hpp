#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include "walsh/geometry.hpp"
#include "walsh/model.hpp"
#include "walsh/simulate.hpp"

namespace walsh {

/// Ensemble kernels run per path index. Each path writes only its own result
/// slot and reductions happen afterwards in index order, so serial and OpenMP
/// runs are bitwise identical for any thread count.
enum class Execution { serial, parallel };

/// Caps the OpenMP pool; n <= 0 restores the default (all cores).
void set_thread_count(int n);
int thread_count();

namespace detail {
void parallel_for(std::size_t n, void (*body)(std::size_t, void*), void* ctx);
}

/// Runs f(i) for i in [0, n). An exception from any path is rethrown after
/// the loop; with several failures the lowest path index wins.
template <class F>
void for_each_path(std::size_t n, Execution exec, F&& f) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  struct Ctx {
    F* f;
    std::vector<std::exception_ptr> errors;
  } ctx{&f, std::vector<std::exception_ptr>(n)};
  detail::parallel_for(
      n,
      [](std::size_t i, void* p) {
        auto* c = static_cast<Ctx*>(p);
        try {
          (*c->f)(i);
        } catch (...) {
          c->errors[i] = std::current_exception();
        }
      },
      &ctx);
  for (auto& e : ctx.errors)
    if (e) std::rethrow_exception(e);
}

struct TerminalSample {
  std::vector<double> times;
  std::vector<std::vector<TreePoint>> states;  // [time][path]
  std::vector<std::uint8_t> exploded;          // per path
};

/// States of cfg.path_count independent Walsh diffusions at the requested
/// times. Path i equals simulate_walsh_diffusion(..., i) at those nodes.
TerminalSample terminal_states(const CoefficientField& field, const SpinningMeasure& mu,
                               const TreePoint& x0, const SimConfig& cfg,
                               const std::vector<double>& times, Execution exec);

/// Coupling time per pair, matching simulate_coupled_diffusions(..., i).tau.
std::vector<double> coupling_times(const CoefficientField& field, const SpinningMeasure& mu,
                                   const TreePoint& x1, const TreePoint& x2, const SimConfig& cfg,
                                   Execution exec);

struct LocalTimeTotals {
  std::vector<double> total;               // Lambda(T) per path
  std::vector<std::vector<double>> split;  // [subset][path]
};

/// Local-time shell estimate at the horizon for every ray subset. Path i
/// matches estimate_local_time on simulate_walsh_diffusion(..., i).
LocalTimeTotals local_times(const CoefficientField& field, const SpinningMeasure& mu,
                            const TreePoint& x0, const std::vector<std::vector<bool>>& subsets,
                            const SimConfig& cfg, Execution exec);

/// Walsh BM from the origin.
LocalTimeTotals walsh_bm_local_times(const SpinningMeasure& mu,
                                     const std::vector<std::vector<bool>>& subsets,
                                     const SimConfig& cfg, Execution exec);

/// sample_high_excursion_count for paths 0 .. count-1.
std::vector<std::size_t> high_excursion_counts(double ell, double delta, double dt,
                                               std::uint64_t seed, std::size_t count,
                                               Execution exec);

/// Sup embedded distance of the coupled Walsh BM pair for every plan, with
/// common random numbers: the radial path and the per-excursion uniforms are
/// shared across plans. Result is [plan][path]; entry (k, i) equals
/// sup_distance(simulate_coupled_walsh_bm(plans[k], cfg, i), first, seconds[k]).
std::vector<std::vector<double>> coupling_sup_distances(const SpinningMeasure& first,
                                                        const std::vector<SpinningMeasure>& seconds,
                                                        const std::vector<CouplingPlan>& plans,
                                                        const SimConfig& cfg, Execution exec);

}  // namespace walsh
