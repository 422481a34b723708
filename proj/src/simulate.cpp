#include "walsh/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "walsh/csv.hpp"

namespace walsh {

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

std::size_t SimConfig::index_of(double t) const {
  return std::min(steps(), static_cast<std::size_t>(std::llround(t / dt)));
}

void SimConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon T must be positive");
  if (!(dt > 0.0)) throw DomainError("step dt must be positive");
  if (!(dt < horizon)) throw DomainError("step dt must be smaller than the horizon T");
  if (path_count == 0) throw DomainError("path count must be positive");
}

void SimConfig::validate_local_time() const {
  validate();
  if (!(local_time_epsilon > 0.0 && local_time_epsilon < 1.0))
    throw DomainError("local-time epsilon must lie in (0, 1)");
  if (local_time_epsilon < std::sqrt(dt))
    throw DomainError("local-time epsilon " + std::to_string(local_time_epsilon) +
                      " is below sqrt(dt) = " + std::to_string(std::sqrt(dt)));
}

// ---------------------------------------------------------------------------

WalshStepper::WalshStepper(const CoefficientField& field, const SpinningMeasure& mu,
                           const TreePoint& x0, double dt, Stream rays)
    : field_(&field),
      mu_(&mu),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      rays_(rays),
      state_(x0),
      excursion_(x0.is_origin() ? 0 : 1),
      crossed_(x0.is_origin()) {
  field.check_compatible(mu);
  if (!x0.is_origin()) field.eval(x0);
}

bool WalshStepper::step(double z) {
  if (exploded_) return false;
  ++step_;
  int ray = state_.ray;
  double r = state_.radius;
  if (state_.is_origin()) {
    ray = static_cast<int>(mu_->sample(rays_.uniform()));
    ++excursion_;
  }
  const auto i = static_cast<std::size_t>(ray);
  const double next = r + field_->drift(i, r) * dt_ + field_->dispersion(i, r) * sqrt_dt_ * z;
  if (!std::isfinite(next))
    throw NumericError("non-finite Euler step at index " + std::to_string(step_));
  crossed_ = false;
  double reflected = next;
  if (next <= 0.0) {
    reflected = -next;
    ray = static_cast<int>(mu_->sample(rays_.uniform()));
    ++excursion_;
    crossed_ = true;
  }
  if (reflected >= field_->domain_radius(static_cast<std::size_t>(ray))) {
    exploded_ = true;
    exploded_ray_ = ray;
    return false;
  }
  state_ = TreePoint::on_ray(ray, reflected);
  return true;
}

namespace {

CoefficientField brownian_field(std::size_t rays) {
  return CoefficientField::uniform(rays, RadialCoefficient::constant(0.0),
                                   RadialCoefficient::constant(1.0));
}

SpinningMeasure single_ray() { return SpinningMeasure::dirac(Direction::from_angle(0, 0.0)); }

void reserve(WalshPath& p, std::size_t n) {
  p.states.reserve(n + 1);
  p.excursion.reserve(n + 1);
  p.origin_hit.reserve(n + 1);
  p.increments.reserve(n);
}

void record(WalshPath& p, const WalshStepper& s) {
  p.states.push_back(s.state());
  p.excursion.push_back(s.excursion());
  p.origin_hit.push_back(s.crossed() ? 1 : 0);
}

}  // namespace

WalshPath simulate_walsh_diffusion(const CoefficientField& field, const SpinningMeasure& mu,
                                   const TreePoint& x0, const SimConfig& cfg,
                                   std::uint64_t path) {
  cfg.validate();
  const std::size_t n = cfg.steps();
  Stream noise(cfg.seed, path, StreamTag::driving_noise);
  WalshStepper stepper(field, mu, x0, cfg.dt, Stream(cfg.seed, path, StreamTag::ray_choice));
  WalshPath out;
  out.dt = cfg.dt;
  reserve(out, n);
  record(out, stepper);
  const double sqrt_dt = std::sqrt(cfg.dt);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = noise.normal();
    if (!stepper.step(z)) {
      out.explosion = Explosion{static_cast<double>(stepper.step_index()) * cfg.dt,
                                mu.atom(static_cast<std::size_t>(stepper.exploded_ray()))
                                    .direction.id};
      break;
    }
    out.increments.push_back(z * sqrt_dt);
    record(out, stepper);
  }
  return out;
}

WalshPath simulate_walsh_bm(const SpinningMeasure& mu, const SimConfig& cfg, std::uint64_t path) {
  const CoefficientField field = brownian_field(mu.size());
  return simulate_walsh_diffusion(field, mu, TreePoint::origin(), cfg, path);
}

RadialPath simulate_reflected_radial(const RadialCoefficient& drift,
                                     const RadialCoefficient& dispersion, double r0,
                                     const SimConfig& cfg, std::uint64_t path) {
  if (!(r0 >= 0.0)) throw DomainError("reflected radial start must be nonnegative");
  const CoefficientField field({RayCoefficients{drift, dispersion}});
  const SpinningMeasure mu = single_ray();
  const WalshPath wp = simulate_walsh_diffusion(field, mu, TreePoint::on_ray(0, r0), cfg, path);
  RadialPath out;
  out.dt = wp.dt;
  out.radius.reserve(wp.size());
  for (const TreePoint& x : wp.states) out.radius.push_back(x.radius);
  out.origin_hit = wp.origin_hit;
  return out;
}

CoupledPaths simulate_coupled_walsh_bm(const CouplingPlan& plan, const SimConfig& cfg,
                                       std::uint64_t path) {
  cfg.validate();
  const std::size_t n = cfg.steps();
  const CoefficientField field = brownian_field(1);
  const SpinningMeasure mu = single_ray();
  Stream noise(cfg.seed, path, StreamTag::driving_noise);
  Stream pairs(cfg.seed, path, StreamTag::ray_choice);
  WalshStepper radial(field, mu, TreePoint::origin(), cfg.dt,
                      Stream(cfg.seed, path, StreamTag::aux));
  CoupledPaths out;
  out.first.dt = out.second.dt = cfg.dt;
  reserve(out.first, n);
  reserve(out.second, n);
  std::uint32_t current = 0;
  std::pair<std::size_t, std::size_t> rays{0, 0};
  auto push = [&](const WalshStepper& s) {
    if (s.excursion() != 0 && s.excursion() != current) {
      current = s.excursion();
      rays = plan.sample(pairs.uniform());
    }
    const double r = s.state().radius;
    const bool at_origin = s.state().is_origin();
    out.first.states.push_back(at_origin ? TreePoint::origin()
                                         : TreePoint::on_ray(static_cast<int>(rays.first), r));
    out.second.states.push_back(at_origin ? TreePoint::origin()
                                          : TreePoint::on_ray(static_cast<int>(rays.second), r));
    for (WalshPath* p : {&out.first, &out.second}) {
      p->excursion.push_back(s.excursion());
      p->origin_hit.push_back(s.crossed() ? 1 : 0);
    }
  };
  push(radial);
  const double sqrt_dt = std::sqrt(cfg.dt);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = noise.normal();
    radial.step(z);
    out.first.increments.push_back(z * sqrt_dt);
    out.second.increments.push_back(z * sqrt_dt);
    push(radial);
  }
  return out;
}

CoupledPaths simulate_coupled_diffusions(const CoefficientField& field,
                                         const SpinningMeasure& mu, const TreePoint& x1,
                                         const TreePoint& x2, const SimConfig& cfg,
                                         std::uint64_t path) {
  if (!field.dispersion_angular_independent())
    throw DomainError("coupled diffusions need the same dispersion on every ray");
  cfg.validate();
  const std::size_t n = cfg.steps();
  Stream noise(cfg.seed, path, StreamTag::driving_noise);
  WalshStepper a(field, mu, x1, cfg.dt, Stream(cfg.seed, path, StreamTag::ray_choice));
  WalshStepper b(field, mu, x2, cfg.dt, Stream(cfg.seed, path, StreamTag::second_rays));
  CoupledPaths out;
  out.first.dt = out.second.dt = cfg.dt;
  reserve(out.first, n);
  reserve(out.second, n);
  bool merged = x1 == x2;
  if (merged) out.tau = 0.0;
  record(out.first, a);
  record(out.second, merged ? a : b);
  const double sqrt_dt = std::sqrt(cfg.dt);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = noise.normal();
    const bool ok_a = a.step(z);
    const bool ok_b = merged || b.step(z);
    if (!ok_a || !ok_b) {
      const double t = static_cast<double>(k + 1) * cfg.dt;
      if (!ok_a)
        out.first.explosion =
            Explosion{t, mu.atom(static_cast<std::size_t>(a.exploded_ray())).direction.id};
      if (!ok_b)
        out.second.explosion =
            Explosion{t, mu.atom(static_cast<std::size_t>(b.exploded_ray())).direction.id};
      break;
    }
    if (!merged && a.crossed() && b.crossed()) {
      merged = true;
      out.tau = static_cast<double>(k + 1) * cfg.dt;
    }
    out.first.increments.push_back(z * sqrt_dt);
    out.second.increments.push_back(z * sqrt_dt);
    record(out.first, a);
    record(out.second, merged ? a : b);
  }
  return out;
}

namespace {

double embedded_gap(const TreePoint& x, const SpinningMeasure& mx, const TreePoint& y,
                    const SpinningMeasure& my) {
  if (x.is_origin()) return y.radius;
  if (y.is_origin()) return x.radius;
  const auto& ex = mx.atom(static_cast<std::size_t>(x.ray)).direction.embedding;
  const auto& ey = my.atom(static_cast<std::size_t>(y.ray)).direction.embedding;
  if (ex.size() != ey.size()) throw DomainError("embeddings of different dimension");
  double s = 0.0;
  for (std::size_t d = 0; d < ex.size(); ++d) {
    const double diff = x.radius * ex[d] - y.radius * ey[d];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

double sup_distance(const CoupledPaths& pair, const SpinningMeasure& first,
                    const SpinningMeasure& second) {
  double sup = 0.0;
  const std::size_t n = std::min(pair.first.size(), pair.second.size());
  for (std::size_t k = 0; k < n; ++k)
    sup = std::max(sup, embedded_gap(pair.first.states[k], first, pair.second.states[k], second));
  return sup;
}

// ---------------------------------------------------------------------------

std::vector<double> time_change(const WalshPath& path, const CoefficientField& field) {
  if (!field.driftless()) throw DomainError("time change requires a driftless coefficient field");
  auto sigma2 = [&](const TreePoint& x, const TreePoint& neighbour) {
    std::size_t ray = 0;
    if (!x.is_origin())
      ray = static_cast<std::size_t>(x.ray);
    else if (!neighbour.is_origin())
      ray = static_cast<std::size_t>(neighbour.ray);
    const double s = field.dispersion(ray, x.radius);
    return s * s;
  };
  std::vector<double> clock(path.size(), 0.0);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const TreePoint& a = path.states[k - 1];
    const TreePoint& b = path.states[k];
    clock[k] = clock[k - 1] + 0.5 * (sigma2(a, b) + sigma2(b, a)) * path.dt;
  }
  return clock;
}

TransformedPath time_change_and_scale(const WalshPath& path, const CoefficientField& field,
                                      const RadialGrid& grid) {
  const ScaleTransform st(field, grid);
  TransformedPath out;
  out.scaled = path;
  for (TreePoint& x : out.scaled.states)
    if (!x.is_origin()) x.radius = st.scale(static_cast<std::size_t>(x.ray), x.radius);
  if (field.driftless()) out.clock = time_change(path, field);
  return out;
}

LocalTimeEstimate estimate_local_time(const WalshPath& path, const CoefficientField& field,
                                      const std::vector<bool>& ray_set, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("local-time epsilon must be positive");
  if (ray_set.size() != field.size()) throw DomainError("ray set size does not match the field");
  LocalTimeEstimate out;
  out.epsilon = epsilon;
  out.total.assign(path.size(), 0.0);
  out.split.assign(path.size(), 0.0);
  const double scale = path.dt / (2.0 * epsilon);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const TreePoint& x = path.states[k - 1];
    double add = 0.0;
    bool in_set = false;
    if (!x.is_origin() && x.radius < epsilon) {
      const auto ray = static_cast<std::size_t>(x.ray);
      const double s = field.dispersion(ray, x.radius);
      add = s * s * scale;
      in_set = ray_set[ray];
    }
    out.total[k] = out.total[k - 1] + add;
    out.split[k] = out.split[k - 1] + (in_set ? add : 0.0);
  }
  return out;
}

ExcursionStats excursion_decomposition(const RadialPath& path, double delta, double ell,
                                       double epsilon) {
  if (!(delta > 0.0)) throw DomainError("excursion height threshold must be positive");
  if (!(epsilon > 0.0)) throw DomainError("local-time epsilon must be positive");
  ExcursionStats out;
  const std::size_t n = path.radius.size();
  // Excursions: maximal runs of positive radius not interrupted by a zero-set node.
  std::size_t k = 0;
  while (k < n) {
    if (path.radius[k] <= 0.0) {
      ++k;
      continue;
    }
    Excursion e{k, k + 1, path.radius[k], false};
    while (e.end < n && path.radius[e.end] > 0.0 && !path.origin_hit[e.end]) {
      e.height = std::max(e.height, path.radius[e.end]);
      ++e.end;
    }
    e.complete = e.end < n;
    out.excursions.push_back(e);
    k = e.end;
  }
  double lambda = 0.0;
  const double scale = path.dt / (2.0 * epsilon);
  for (std::size_t j = 1; j < n && !out.ell_node; ++j) {
    const double r = path.radius[j - 1];
    if (r > 0.0 && r < epsilon) lambda += scale;
    if (lambda >= ell) out.ell_node = j;
  }
  const std::size_t limit = out.ell_node.value_or(n);
  for (const Excursion& e : out.excursions) {
    if (e.height < delta) continue;
    if (e.complete && e.end <= limit) ++out.high_count;
    if (!e.complete && !out.ell_node) ++out.high_count;
  }
  return out;
}

std::size_t sample_high_excursion_count(double ell, double delta, double dt, std::uint64_t seed,
                                        std::uint64_t path) {
  if (!(ell > 0.0) || !(delta > 0.0) || !(dt > 0.0))
    throw DomainError("excursion count needs positive level, threshold and step");
  Stream noise(seed, path, StreamTag::driving_noise);
  Stream bridge(seed, path, StreamTag::bridge);
  const double sqrt_dt = std::sqrt(dt);
  double w = 0.0;  // driving BM
  double m = 0.0;  // running max = local time of S = M - W
  bool counted = false;
  std::size_t count = 0;
  constexpr std::size_t kMaxSteps = 4'000'000'000ULL;
  for (std::size_t step = 0; step < kMaxSteps; ++step) {
    const double next = w + sqrt_dt * noise.normal();
    const double gap = next - w;
    const double bridge_max =
        0.5 * (w + next + std::sqrt(gap * gap - 2.0 * dt * std::log(bridge.uniform())));
    if (bridge_max > m) {
      m = bridge_max;
      counted = false;
      if (m >= ell) return count;
    }
    const double level = m - delta;
    const double u = bridge.uniform();
    if (!counted) {
      bool high = next <= level;
      if (!high && w > level) high = u < std::exp(-2.0 * (w - level) * (next - level) / dt);
      if (high) {
        ++count;
        // The rest of this excursion changes neither the count nor the local
        // time; restart from its end.
        w = m;
        continue;
      }
    }
    w = next;
  }
  throw NumericError("excursion count did not reach the local-time level");
}

void write_path_csv(std::ostream& out, const WalshPath& path, const SpinningMeasure& mu,
                    std::size_t thin) {
  if (thin == 0) throw DomainError("thinning factor must be positive");
  csv::Writer w(out, {"t", "ray", "radius", "excursion_id"});
  for (std::size_t k = 0; k < path.size(); k += thin) {
    const TreePoint& x = path.states[k];
    w.field(path.time(k));
    if (x.is_origin())
      w.field(std::string_view{});
    else
      w.field(mu.atom(static_cast<std::size_t>(x.ray)).direction.id);
    w.field(x.radius).field(static_cast<std::size_t>(path.excursion[k]));
    w.end_row();
  }
}

}  // namespace walsh
