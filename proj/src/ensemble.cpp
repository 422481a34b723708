#include "walsh/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace walsh {

void set_thread_count(int n) {
  omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
}

int thread_count() { return omp_get_max_threads(); }

void detail::parallel_for(std::size_t n, void (*body)(std::size_t, void*), void* ctx) {
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i), ctx);
}

TerminalSample terminal_states(const CoefficientField& field, const SpinningMeasure& mu,
                               const TreePoint& x0, const SimConfig& cfg,
                               const std::vector<double>& times, Execution exec) {
  cfg.validate();
  TerminalSample out;
  out.times = times;
  std::vector<std::size_t> nodes;
  for (double t : times) {
    if (t < 0.0 || t > cfg.horizon + 1e-12) throw DomainError("sample time outside [0, T]");
    nodes.push_back(cfg.index_of(t));
  }
  if (!std::is_sorted(nodes.begin(), nodes.end()))
    throw DomainError("sample times must be nondecreasing");
  const std::size_t last = nodes.empty() ? 0 : nodes.back();
  out.states.assign(times.size(), std::vector<TreePoint>(cfg.path_count));
  out.exploded.assign(cfg.path_count, 0);
  for_each_path(cfg.path_count, exec, [&](std::size_t i) {
    Stream noise(cfg.seed, i, StreamTag::driving_noise);
    WalshStepper s(field, mu, x0, cfg.dt, Stream(cfg.seed, i, StreamTag::ray_choice));
    std::size_t next = 0;
    for (std::size_t k = 0; next < nodes.size(); ++k) {
      if (k > 0 && k <= last && !s.exploded() && !s.step(noise.normal())) out.exploded[i] = 1;
      while (next < nodes.size() && nodes[next] == k) out.states[next++][i] = s.state();
    }
  });
  return out;
}

std::vector<double> coupling_times(const CoefficientField& field, const SpinningMeasure& mu,
                                   const TreePoint& x1, const TreePoint& x2, const SimConfig& cfg,
                                   Execution exec) {
  if (!field.dispersion_angular_independent())
    throw DomainError("coupled diffusions need the same dispersion on every ray");
  cfg.validate();
  const std::size_t n = cfg.steps();
  std::vector<double> tau(cfg.path_count, kInfinity);
  for_each_path(cfg.path_count, exec, [&](std::size_t i) {
    if (x1 == x2) {
      tau[i] = 0.0;
      return;
    }
    Stream noise(cfg.seed, i, StreamTag::driving_noise);
    WalshStepper a(field, mu, x1, cfg.dt, Stream(cfg.seed, i, StreamTag::ray_choice));
    WalshStepper b(field, mu, x2, cfg.dt, Stream(cfg.seed, i, StreamTag::second_rays));
    for (std::size_t k = 0; k < n; ++k) {
      const double z = noise.normal();
      if (!a.step(z) || !b.step(z)) return;
      if (a.crossed() && b.crossed()) {
        tau[i] = static_cast<double>(k + 1) * cfg.dt;
        return;
      }
    }
  });
  return tau;
}

LocalTimeTotals local_times(const CoefficientField& field, const SpinningMeasure& mu,
                            const TreePoint& x0, const std::vector<std::vector<bool>>& subsets,
                            const SimConfig& cfg, Execution exec) {
  cfg.validate_local_time();
  field.check_compatible(mu);
  for (const auto& s : subsets)
    if (s.size() != mu.size()) throw DomainError("ray subset size does not match the measure");
  const std::size_t n = cfg.steps();
  const double eps = cfg.local_time_epsilon;
  const double scale = cfg.dt / (2.0 * eps);
  LocalTimeTotals out;
  out.total.assign(cfg.path_count, 0.0);
  out.split.assign(subsets.size(), std::vector<double>(cfg.path_count, 0.0));
  for_each_path(cfg.path_count, exec, [&](std::size_t i) {
    Stream noise(cfg.seed, i, StreamTag::driving_noise);
    WalshStepper s(field, mu, x0, cfg.dt, Stream(cfg.seed, i, StreamTag::ray_choice));
    double total = 0.0;
    std::vector<double> split(subsets.size(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const TreePoint& x = s.state();
      if (!x.is_origin() && x.radius < eps) {
        const auto ray = static_cast<std::size_t>(x.ray);
        const double sigma = field.dispersion(ray, x.radius);
        const double add = sigma * sigma * scale;
        total += add;
        for (std::size_t a = 0; a < subsets.size(); ++a)
          if (subsets[a][ray]) split[a] += add;
      }
      if (!s.step(noise.normal())) break;
    }
    out.total[i] = total;
    for (std::size_t a = 0; a < subsets.size(); ++a) out.split[a][i] = split[a];
  });
  return out;
}

LocalTimeTotals walsh_bm_local_times(const SpinningMeasure& mu,
                                     const std::vector<std::vector<bool>>& subsets,
                                     const SimConfig& cfg, Execution exec) {
  const CoefficientField field = CoefficientField::uniform(
      mu.size(), RadialCoefficient::constant(0.0), RadialCoefficient::constant(1.0));
  return local_times(field, mu, TreePoint::origin(), subsets, cfg, exec);
}

std::vector<std::size_t> high_excursion_counts(double ell, double delta, double dt,
                                               std::uint64_t seed, std::size_t count,
                                               Execution exec) {
  std::vector<std::size_t> out(count, 0);
  for_each_path(count, exec, [&](std::size_t i) {
    out[i] = sample_high_excursion_count(ell, delta, dt, seed, i);
  });
  return out;
}

std::vector<std::vector<double>> coupling_sup_distances(const SpinningMeasure& first,
                                                        const std::vector<SpinningMeasure>& seconds,
                                                        const std::vector<CouplingPlan>& plans,
                                                        const SimConfig& cfg, Execution exec) {
  cfg.validate();
  if (seconds.size() != plans.size()) throw DomainError("one second measure per plan required");
  // chord[k][(i, j)]: embedded distance per unit radius under plan k.
  std::vector<std::vector<double>> chord(plans.size());
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const CouplingPlan& p = plans[k];
    if (p.rows() != first.size() || p.cols() != seconds[k].size())
      throw DomainError("coupling plan shape does not match the measures");
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j)
        chord[k].push_back(chord_distance(first.atom(i).direction, seconds[k].atom(j).direction));
  }
  const CoefficientField field = CoefficientField::uniform(1, RadialCoefficient::constant(0.0),
                                                           RadialCoefficient::constant(1.0));
  const SpinningMeasure line = SpinningMeasure::dirac(Direction::from_angle(0, 0.0));
  const std::size_t n = cfg.steps();
  std::vector<std::vector<double>> out(plans.size(), std::vector<double>(cfg.path_count, 0.0));
  for_each_path(cfg.path_count, exec, [&](std::size_t i) {
    Stream noise(cfg.seed, i, StreamTag::driving_noise);
    Stream pairs(cfg.seed, i, StreamTag::ray_choice);
    WalshStepper radial(field, line, TreePoint::origin(), cfg.dt,
                        Stream(cfg.seed, i, StreamTag::aux));
    std::vector<double> unit(plans.size(), 0.0);  // chord of the current excursion
    std::vector<double> sup(plans.size(), 0.0);
    std::uint32_t current = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      if (k > 0) radial.step(noise.normal());
      const std::uint32_t e = radial.excursion();
      if (e != 0 && e != current) {
        current = e;
        const double u = pairs.uniform();
        for (std::size_t p = 0; p < plans.size(); ++p) {
          const auto [a, b] = plans[p].sample(u);
          unit[p] = chord[p][a * plans[p].cols() + b];
        }
      }
      const double r = radial.state().radius;
      for (std::size_t p = 0; p < plans.size(); ++p) sup[p] = std::max(sup[p], unit[p] * r);
    }
    for (std::size_t p = 0; p < plans.size(); ++p) out[p][i] = sup[p];
  });
  return out;
}

}  // namespace walsh
