#include "walsh/model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "walsh/csv.hpp"
#include "walsh/quadrature.hpp"

namespace walsh {

// ---------------------------------------------------------------------------
// Coefficients

RadialCoefficient RadialCoefficient::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("constant coefficient must be finite");
  RadialCoefficient out;
  out.family_ = Family::constant;
  out.a_ = c;
  return out;
}

RadialCoefficient RadialCoefficient::affine(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("affine coefficient must be finite");
  RadialCoefficient out;
  out.family_ = Family::affine;
  out.a_ = a;
  out.b_ = b;
  return out;
}

RadialCoefficient RadialCoefficient::tabulated(std::vector<double> knots, std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size())
    throw DomainError("tabulated coefficient needs matching, nonempty knots and values");
  if (knots.front() != 0.0) throw DomainError("tabulated knots must start at 0");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw DomainError("tabulated knots must increase strictly");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("tabulated values must be finite");
  RadialCoefficient out;
  out.family_ = Family::tabulated;
  out.knots_ = std::move(knots);
  out.values_ = std::move(values);
  return out;
}

double RadialCoefficient::operator()(double r) const {
  switch (family_) {
    case Family::constant:
      return a_;
    case Family::affine:
      return a_ + b_ * r;
    case Family::tabulated: {
      if (r <= knots_.front()) return values_.front();
      if (r >= knots_.back()) return values_.back();
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), r);
      const std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
      const std::size_t lo = hi - 1;
      const double w = (r - knots_[lo]) / (knots_[hi] - knots_[lo]);
      return values_[lo] + w * (values_[hi] - values_[lo]);
    }
  }
  return 0.0;
}

bool RadialCoefficient::is_constant() const {
  switch (family_) {
    case Family::constant:
      return true;
    case Family::affine:
      return b_ == 0.0;
    case Family::tabulated:
      return std::all_of(values_.begin(), values_.end(),
                         [&](double v) { return v == values_.front(); });
  }
  return false;
}

bool RadialCoefficient::positive_on(double limit) const {
  switch (family_) {
    case Family::constant:
      return a_ > 0.0;
    case Family::affine:
      if (!(a_ > 0.0)) return false;
      if (b_ >= 0.0) return true;
      return std::isfinite(limit) && a_ + b_ * limit > 0.0;
    case Family::tabulated:
      return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
  }
  return false;
}

CoefficientField::CoefficientField(std::vector<RayCoefficients> rays) : rays_(std::move(rays)) {
  if (rays_.empty()) throw DomainError("coefficient field needs at least one ray");
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    const RayCoefficients& rc = rays_[i];
    if (!(rc.domain_radius > 0.0))
      throw DomainError("ray " + std::to_string(i) + ": domain radius must be positive");
    if (!rc.dispersion.positive_on(rc.domain_radius))
      throw DomainError("ray " + std::to_string(i) +
                        ": dispersion must stay bounded away from 0 on the ray");
  }
}

CoefficientField CoefficientField::uniform(std::size_t rays, const RadialCoefficient& drift,
                                           const RadialCoefficient& dispersion) {
  return CoefficientField(std::vector<RayCoefficients>(rays, RayCoefficients{drift, dispersion}));
}

CoefficientField::Values CoefficientField::eval(const TreePoint& x, std::size_t origin_ray) const {
  const std::size_t ray = x.is_origin() ? origin_ray : static_cast<std::size_t>(x.ray);
  if (ray >= rays_.size()) throw DomainError("point refers to unknown ray " + std::to_string(ray));
  if (!(x.radius < rays_[ray].domain_radius))
    throw DomainError("point at radius " + std::to_string(x.radius) + " lies outside ray " +
                      std::to_string(ray) + " (domain radius " +
                      std::to_string(rays_[ray].domain_radius) + ")");
  return {rays_[ray].drift(x.radius), rays_[ray].dispersion(x.radius)};
}

bool CoefficientField::dispersion_angular_independent() const {
  return std::all_of(rays_.begin(), rays_.end(),
                     [&](const RayCoefficients& rc) { return rc.dispersion == rays_[0].dispersion; });
}

bool CoefficientField::driftless() const {
  return std::all_of(rays_.begin(), rays_.end(), [](const RayCoefficients& rc) {
    return rc.drift.is_constant() && rc.drift(0.0) == 0.0;
  });
}

void CoefficientField::check_compatible(const SpinningMeasure& mu) const {
  if (mu.size() != rays_.size())
    throw DomainError("coefficient field has " + std::to_string(rays_.size()) +
                      " rays but the spinning measure has " + std::to_string(mu.size()) + " atoms");
}

// ---------------------------------------------------------------------------
// Ray quadrature

std::vector<double> RadialGrid::nodes(double domain_radius) const {
  if (points < 2 || !(r_max > 0.0)) throw DomainError("radial grid needs r_max > 0 and >= 2 points");
  const double hi = std::min(r_max, domain_radius);
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k)
    out[k] = hi * static_cast<double>(k) / static_cast<double>(points - 1);
  return out;
}

namespace {

// Splits [a, b] at coefficient knots so each piece has a smooth integrand.
template <class F>
double integrate_split(const quad::AdaptiveSimpson& q, const RayCoefficients& rc, F&& f, double a,
                       double b) {
  if (b <= a) return 0.0;
  std::vector<double> cuts{a};
  for (auto k : {rc.drift.knots(), rc.dispersion.knots()})
    for (double x : k)
      if (x > a && x < b) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += q.integrate(f, cuts[i], cuts[i + 1]);
  return total;
}

}  // namespace

RayQuadrature::RayQuadrature(const RayCoefficients& coeffs, const RadialGrid& grid)
    : coeffs_(coeffs), tol_(grid.abs_tol) {
  nodes_ = grid.nodes(coeffs.domain_radius);
  for (auto k : {coeffs.drift.knots(), coeffs.dispersion.knots()})
    for (double x : k)
      if (x > 0.0 && x < nodes_.back()) nodes_.push_back(x);
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

  exponent_nodes_.assign(nodes_.size(), 0.0);
  scale_nodes_.assign(nodes_.size(), 0.0);
  mass_nodes_.assign(nodes_.size(), 0.0);
  for (std::size_t k = 1; k < nodes_.size(); ++k)
    exponent_nodes_[k] = exponent_nodes_[k - 1] + exponent_piece(nodes_[k - 1], nodes_[k]);
  for (std::size_t k = 1; k < nodes_.size(); ++k) {
    scale_nodes_[k] = scale_nodes_[k - 1] + scale_piece(nodes_[k - 1], nodes_[k]);
    mass_nodes_[k] = mass_nodes_[k - 1] + mass_piece(nodes_[k - 1], nodes_[k]);
  }
}

std::size_t RayQuadrature::node_below(double r) const {
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  return it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

double RayQuadrature::exponent_piece(double a, double b) const {
  const quad::AdaptiveSimpson q(tol_);
  return integrate_split(q, coeffs_, [this](double u) {
    const double s = coeffs_.dispersion(u);
    return 2.0 * coeffs_.drift(u) / (s * s);
  }, a, b);
}

double RayQuadrature::exponent(double r) const {
  const std::size_t k = node_below(r);
  return exponent_nodes_[k] + exponent_piece(nodes_[k], r);
}

double RayQuadrature::scale_piece(double a, double b) const {
  const quad::AdaptiveSimpson q(tol_);
  return integrate_split(q, coeffs_, [this](double u) { return std::exp(-exponent(u)); }, a, b);
}

double RayQuadrature::mass_piece(double a, double b) const {
  const quad::AdaptiveSimpson q(tol_);
  return integrate_split(q, coeffs_, [this](double u) { return speed_density(u); }, a, b);
}

double RayQuadrature::scale(double r) const {
  const std::size_t k = node_below(r);
  return scale_nodes_[k] + scale_piece(nodes_[k], r);
}

double RayQuadrature::scale_derivative(double r) const { return std::exp(-exponent(r)); }

double RayQuadrature::speed_density(double r) const {
  const double s = coeffs_.dispersion(r);
  return std::exp(exponent(r)) / (s * s);
}

double RayQuadrature::speed_mass(double r) const {
  const std::size_t k = node_below(r);
  return mass_nodes_[k] + mass_piece(nodes_[k], r);
}

double RayQuadrature::speed_mass_between(double a, double b) const {
  if (b <= a) return 0.0;
  if (b <= nodes_.back()) return speed_mass(b) - speed_mass(a);
  // Beyond the tabulation integrate directly, in unit-length pieces so the
  // adaptive rule sees a resolvable integrand.
  double total = 0.0;
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, lo + std::max(1.0, 0.125 * lo));
    total += mass_piece(lo, hi);
    lo = hi;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Scale transform

ScaleTransform::ScaleTransform(const CoefficientField& field, const RadialGrid& grid) {
  for (std::size_t i = 0; i < field.size(); ++i)
    rays_.push_back(std::make_shared<const RayQuadrature>(field.ray(i), grid));
}

ScaleTransform scale_transform(const CoefficientField& field, const RadialGrid& grid) {
  return ScaleTransform(field, grid);
}

double ScaleTransform::inverse(std::size_t ray, double y) const {
  if (y <= 0.0) return 0.0;
  const RayQuadrature& rq = *rays_[ray];
  const auto nodes = rq.nodes();
  const auto svals = rq.scale_at_nodes();
  double lo = 0.0, hi = 0.0;
  if (y <= svals.back()) {
    const auto it = std::lower_bound(svals.begin(), svals.end(), y);
    const std::size_t k = static_cast<std::size_t>(it - svals.begin());
    hi = nodes[k];
    lo = k == 0 ? 0.0 : nodes[k - 1];
  } else {
    const double limit = rq.coefficients().domain_radius;
    lo = nodes.back();
    hi = std::max(1.0, 2.0 * lo);
    while (rq.scale(hi) < y) {
      lo = hi;
      hi *= 2.0;
      if (hi >= limit) {
        hi = limit;
        break;
      }
      if (hi > 1e12) throw NumericError("scale inverse: value beyond the range of the scale map");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, hi) * 1e-2; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rq.scale(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double ScaleTransform::transformed_dispersion(std::size_t ray, double y) const {
  const double r = inverse(ray, y);
  return rays_[ray]->scale_derivative(r) * rays_[ray]->coefficients().dispersion(r);
}

// ---------------------------------------------------------------------------
// Stationary measure

double speed_normalizer(const RayQuadrature& ray) {
  const double limit = ray.coefficients().domain_radius;
  const double last = ray.nodes().back();
  if (std::isfinite(limit) && last >= limit) {
    const double c = ray.speed_mass(limit);
    return std::isfinite(c) ? c : kInfinity;
  }
  // Tail-ratio test on doubling windows [R, 2R].
  double total = ray.speed_mass(last);
  double R = std::max(last, 1.0);
  if (R > last) total += ray.speed_mass_between(last, R);
  double previous = ray.speed_mass_between(0.5 * R, R);
  int growing = 0;
  for (int window = 0; window < 80; ++window) {
    if (ray.exponent(2.0 * R) > 700.0 || ray.exponent(1.5 * R) > 700.0) return kInfinity;
    const double piece = ray.speed_mass_between(R, 2.0 * R);
    if (!std::isfinite(piece)) return kInfinity;
    total += piece;
    if (piece <= 1e-14 * total) return total;
    growing = piece > 0.5 * previous ? growing + 1 : 0;
    if (growing >= 3) return kInfinity;
    previous = piece;
    R *= 2.0;
  }
  return kInfinity;
}

namespace {

double radial_mean(const RayQuadrature& ray, double normalizer) {
  const quad::AdaptiveSimpson q(ray.tolerance());
  const auto nodes = ray.nodes();
  auto integrand = [&](double u) { return u * ray.speed_density(u); };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
    total += q.integrate(integrand, nodes[k], nodes[k + 1]);
  const double limit = ray.coefficients().domain_radius;
  double R = nodes.back();
  while (R < limit) {
    const double hi = std::min(limit, std::max(2.0 * R, 1.0));
    double piece = 0.0;
    for (double lo = R; lo < hi;) {
      const double step_hi = std::min(hi, lo + std::max(1.0, 0.125 * lo));
      piece += q.integrate(integrand, lo, step_hi);
      lo = step_hi;
    }
    total += piece;
    R = hi;
    if (piece <= 1e-14 * total || R > 1e9) break;
  }
  return total / normalizer;
}

}  // namespace

RadialStationary stationary_radial(const CoefficientField& field, std::size_t ray,
                                   const RadialGrid& grid) {
  const RayQuadrature rq(field.ray(ray), grid);
  RadialStationary out;
  out.normalizer = speed_normalizer(rq);
  out.finite = std::isfinite(out.normalizer);
  const auto nodes = rq.nodes();
  const auto mass = rq.speed_mass_at_nodes();
  const double scale = out.finite ? 1.0 / out.normalizer : 1.0;
  out.r.assign(nodes.begin(), nodes.end());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    out.density.push_back(rq.speed_density(nodes[k]) * scale);
    out.cumulative.push_back(mass[k] * scale);
  }
  if (out.finite) out.mean_radius = radial_mean(rq, out.normalizer);
  return out;
}

StationaryProfile::StationaryProfile(const CoefficientField& field, const SpinningMeasure& mu,
                                     const RadialGrid& grid) {
  field.check_compatible(mu);
  double total = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    auto rq = std::make_shared<const RayQuadrature>(field.ray(i), grid);
    const double c = speed_normalizer(*rq);
    if (!std::isfinite(c))
      throw NonNormalizableError("stationary measure is not normalizable on ray id " +
                                     std::to_string(mu.atom(i).direction.id),
                                 i);
    normalizers_.push_back(c);
    domain_.push_back(field.domain_radius(i));
    total += c * mu.weight(i);
    rays_.push_back(std::move(rq));
  }
  for (std::size_t i = 0; i < field.size(); ++i) {
    masses_.push_back(normalizers_[i] * mu.weight(i) / total);
    const RayQuadrature& rq = *rays_[i];
    RadialStationary rs;
    rs.normalizer = normalizers_[i];
    rs.finite = true;
    const auto nodes = rq.nodes();
    const auto mass = rq.speed_mass_at_nodes();
    rs.r.assign(nodes.begin(), nodes.end());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      rs.density.push_back(rq.speed_density(nodes[k]) / rs.normalizer);
      rs.cumulative.push_back(mass[k] / rs.normalizer);
    }
    rs.mean_radius = radial_mean(rq, rs.normalizer);
    radial_.push_back(std::move(rs));
  }
}

StationaryProfile spider_stationary(const CoefficientField& field, const SpinningMeasure& mu,
                                    const RadialGrid& grid) {
  return StationaryProfile(field, mu, grid);
}

double StationaryProfile::density(std::size_t ray, double r) const {
  if (r < 0.0 || r >= domain_[ray]) return 0.0;
  return rays_[ray]->speed_density(r) / normalizers_[ray];
}

double StationaryProfile::cdf(std::size_t ray, double r) const {
  if (r <= 0.0) return 0.0;
  if (r >= domain_[ray]) return 1.0;
  const RayQuadrature& rq = *rays_[ray];
  const double last = rq.nodes().back();
  const double m = r <= last ? rq.speed_mass(r)
                             : rq.speed_mass_at_nodes().back() + rq.speed_mass_between(last, r);
  return std::min(1.0, m / normalizers_[ray]);
}

namespace {

template <class Cdf>
double invert_cdf(Cdf&& cdf, double u, double limit) {
  if (u <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (cdf(hi) < u) {
    lo = hi;
    hi *= 2.0;
    if (hi >= limit) {
      hi = limit;
      break;
    }
    if (hi > 1e12) throw NumericError("quantile beyond representable range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double StationaryProfile::quantile(std::size_t ray, double u) const {
  if (u >= 1.0) return domain_[ray];
  return invert_cdf([&](double r) { return cdf(ray, r); }, u, domain_[ray]);
}

double StationaryProfile::pooled_cdf(double r) const {
  double c = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i) c += masses_[i] * cdf(i, r);
  return c;
}

double StationaryProfile::pooled_quantile(double u) const {
  const double limit = *std::max_element(domain_.begin(), domain_.end());
  if (u >= 1.0) return limit;
  return invert_cdf([&](double r) { return pooled_cdf(r); }, u, limit);
}

TreePoint StationaryProfile::sample(double u_ray, double u_radius) const {
  double acc = 0.0;
  std::size_t ray = masses_.size() - 1;
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    acc += masses_[i];
    if (u_ray < acc) {
      ray = i;
      break;
    }
  }
  return TreePoint::on_ray(static_cast<int>(ray), quantile(ray, u_radius));
}

void StationaryProfile::write_csv(std::ostream& out, const SpinningMeasure& mu) const {
  csv::Writer w(out, {"ray_id", "r", "density", "cumulative"});
  for (std::size_t i = 0; i < radial_.size(); ++i) {
    const RadialStationary& rs = radial_[i];
    for (std::size_t k = 0; k < rs.r.size(); ++k) {
      w.field(mu.atom(i).direction.id).field(rs.r[k]).field(rs.density[k]).field(rs.cumulative[k]);
      w.end_row();
    }
  }
}

// ---------------------------------------------------------------------------
// Generator

TestFunction TestFunction::constant(double c) {
  return {[c](std::size_t, double) { return c; }, [](std::size_t, double) { return 0.0; },
          [](std::size_t, double) { return 0.0; }};
}

TestFunction TestFunction::power(double k) {
  if (!(k >= 1.0)) throw DomainError("power test function needs exponent >= 1");
  return {[k](std::size_t, double r) { return std::pow(r, k); },
          [k](std::size_t, double r) { return k == 1.0 ? 1.0 : k * std::pow(r, k - 1.0); },
          [k](std::size_t, double r) {
            if (k == 1.0) return 0.0;
            if (k == 2.0) return 2.0;
            return k * (k - 1.0) * std::pow(r, k - 2.0);
          }};
}

TestFunction TestFunction::ray_linear(std::vector<double> slopes) {
  auto s = std::make_shared<const std::vector<double>>(std::move(slopes));
  return {[s](std::size_t i, double r) { return (*s)[i] * r; },
          [s](std::size_t i, double) { return (*s)[i]; }, [](std::size_t, double) { return 0.0; }};
}

double origin_flux(const SpinningMeasure& mu, const TestFunction& f) {
  double flux = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) flux += mu.weight(i) * f.d1(i, 0.0);
  return flux;
}

double ray_generator(const CoefficientField& field, std::size_t ray, const TestFunction& f,
                     double r) {
  const double g = field.drift(ray, r);
  const double s = field.dispersion(ray, r);
  return g * f.d1(ray, r) + 0.5 * s * s * f.d2(ray, r);
}

double apply_generator(const CoefficientField& field, const SpinningMeasure& mu,
                       const TestFunction& f, const TreePoint& x) {
  field.check_compatible(mu);
  const double flux = origin_flux(mu, f);
  if (std::abs(flux) > 1e-8)
    throw DomainClassError("test function violates the gluing condition: flux " +
                               std::to_string(flux),
                           flux);
  if (!x.is_origin()) {
    field.eval(x);  // domain check
    return ray_generator(field, static_cast<std::size_t>(x.ray), f, x.radius);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = field.dispersion(i, 0.0);
    const double w = mu.weight(i) / (s * s);
    num += w * ray_generator(field, i, f, 0.0);
    den += w;
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Lyapunov rate

std::string to_string(LyapunovMode mode) {
  switch (mode) {
    case LyapunovMode::general_grid:
      return "general_grid";
    case LyapunovMode::constant_closed_form:
      return "constant_closed_form";
    case LyapunovMode::bang_bang:
      return "bang_bang";
  }
  return "unknown";
}

LyapunovGrid LyapunovGrid::defaults() {
  LyapunovGrid g;
  const double lo = std::log(1e-3), hi = std::log(50.0);
  for (int i = 0; i < 200; ++i) g.lambdas.push_back(std::exp(lo + (hi - lo) * i / 199.0));
  for (int i = 1; i <= 400; ++i) g.xs.push_back(50.0 * i / 400.0);
  return g;
}

double lyapunov_K(const RadialCoefficient& gbar, const RadialCoefficient& sbar, double x,
                  double lambda) {
  const double s = sbar(x);
  return gbar(x) * lambda + 0.5 * s * s * lambda * lambda;
}

namespace {

double rate_at(const RadialCoefficient& gbar, const RadialCoefficient& sbar,
               std::span<const double> xs, double lambda) {
  double sup = -kInfinity;
  for (double x : xs) sup = std::max(sup, lyapunov_K(gbar, sbar, x, lambda));
  return -sup;
}

}  // namespace

LyapunovReport lyapunov_optimize(const RadialCoefficient& gbar, const RadialCoefficient& sbar,
                                 const LyapunovGrid& grid, LyapunovMode hint) {
  if (grid.lambdas.empty() || grid.xs.empty()) throw DomainError("empty Lyapunov grid");
  LyapunovReport rep;
  std::size_t best = 0;
  double best_k = -kInfinity;
  for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
    const double k = rate_at(gbar, sbar, grid.xs, grid.lambdas[i]);
    if (k > best_k) {
      best_k = k;
      best = i;
    }
  }
  // k(lambda) is concave, so golden section on the bracketing cell is exact
  // up to the tolerance.
  double lo = grid.lambdas[best == 0 ? 0 : best - 1];
  double hi = grid.lambdas[std::min(best + 1, grid.lambdas.size() - 1)];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double ka = rate_at(gbar, sbar, grid.xs, a), kb = rate_at(gbar, sbar, grid.xs, b);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    if (ka >= kb) {
      hi = b;
      b = a;
      kb = ka;
      a = hi - phi * (hi - lo);
      ka = rate_at(gbar, sbar, grid.xs, a);
    } else {
      lo = a;
      a = b;
      ka = kb;
      b = lo + phi * (hi - lo);
      kb = rate_at(gbar, sbar, grid.xs, b);
    }
  }
  rep.lambda_star = 0.5 * (lo + hi);
  rep.k = rate_at(gbar, sbar, grid.xs, rep.lambda_star);
  if (best_k > rep.k) {
    rep.lambda_star = grid.lambdas[best];
    rep.k = best_k;
  }
  rep.certified = rep.k > 0.0;
  rep.xs = grid.xs;
  for (double x : grid.xs) rep.K_curve.push_back(lyapunov_K(gbar, sbar, x, rep.lambda_star));

  rep.mode = hint;
  if (gbar.is_constant() && sbar.is_constant()) {
    if (rep.mode == LyapunovMode::general_grid) rep.mode = LyapunovMode::constant_closed_form;
    const double g = gbar(0.0), s = sbar(0.0);
    if (g < 0.0) rep.closed_form = ClosedForm{-g / (s * s), g * g / (2.0 * s * s)};
  }
  return rep;
}

Envelope drift_envelope(const CoefficientField& field, std::span<const double> xs) {
  if (!field.dispersion_angular_independent())
    throw DomainError("explicit rate needs a dispersion coefficient that is the same on every ray");
  bool all_constant = true;
  for (std::size_t i = 0; i < field.size(); ++i) all_constant &= field.ray(i).drift.is_constant();
  Envelope env{RadialCoefficient::constant(0.0), field.ray(0).dispersion,
               LyapunovMode::general_grid};
  if (all_constant) {
    double g = -kInfinity;
    for (std::size_t i = 0; i < field.size(); ++i) g = std::max(g, field.drift(i, 0.0));
    env.gbar = RadialCoefficient::constant(g);
    const bool unit_sigma = env.sbar.is_constant() && env.sbar(0.0) == 1.0;
    env.mode = field.size() == 2 && unit_sigma ? LyapunovMode::bang_bang
               : env.sbar.is_constant()        ? LyapunovMode::constant_closed_form
                                               : LyapunovMode::general_grid;
    return env;
  }
  std::vector<double> knots{0.0}, values;
  for (double x : xs)
    if (x > knots.back()) knots.push_back(x);
  for (double x : knots) {
    double g = -kInfinity;
    for (std::size_t i = 0; i < field.size(); ++i) g = std::max(g, field.drift(i, x));
    values.push_back(g);
  }
  env.gbar = RadialCoefficient::tabulated(std::move(knots), std::move(values));
  return env;
}

LyapunovReport lyapunov_for_field(const CoefficientField& field, const LyapunovGrid& grid) {
  const Envelope env = drift_envelope(field, grid.xs);
  return lyapunov_optimize(env.gbar, env.sbar, grid, env.mode);
}

}  // namespace walsh
