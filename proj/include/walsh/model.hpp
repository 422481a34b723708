#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "walsh/error.hpp"
#include "walsh/geometry.hpp"

namespace walsh {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One radial coefficient on one ray.
class RadialCoefficient {
 public:
  enum class Family { constant, affine, tabulated };

  static RadialCoefficient constant(double c);
  /// a + b * r
  static RadialCoefficient affine(double a, double b);
  /// Linear interpolation between knots, constant beyond the last knot.
  /// Knots must start at 0 and increase strictly.
  static RadialCoefficient tabulated(std::vector<double> knots, std::vector<double> values);

  double operator()(double r) const;

  Family family() const { return family_; }
  /// Constant in r (including degenerate affine/tabulated forms).
  bool is_constant() const;
  /// Interior breakpoints where the function is not smooth.
  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }
  double a() const { return a_; }
  double b() const { return b_; }

  /// Positive on [0, limit) (limit may be infinite).
  bool positive_on(double limit) const;

  friend bool operator==(const RadialCoefficient&, const RadialCoefficient&) = default;

 private:
  Family family_ = Family::constant;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> values_;
};

struct RayCoefficients {
  RadialCoefficient drift;
  RadialCoefficient dispersion;
  double domain_radius = kInfinity;
};

/// Drift and dispersion per ray, indexed like the atoms of the spinning measure.
class CoefficientField {
 public:
  explicit CoefficientField(std::vector<RayCoefficients> rays);
  static CoefficientField uniform(std::size_t rays, const RadialCoefficient& drift,
                                  const RadialCoefficient& dispersion);

  std::size_t size() const { return rays_.size(); }
  const RayCoefficients& ray(std::size_t i) const { return rays_[i]; }
  double drift(std::size_t ray, double r) const { return rays_[ray].drift(r); }
  double dispersion(std::size_t ray, double r) const { return rays_[ray].dispersion(r); }
  double domain_radius(std::size_t ray) const { return rays_[ray].domain_radius; }

  struct Values {
    double drift;
    double dispersion;
  };
  /// Ray-local coefficient values. At the origin the values of `origin_ray`
  /// are returned. Points beyond the ray's domain radius are rejected.
  Values eval(const TreePoint& x, std::size_t origin_ray = 0) const;

  bool dispersion_angular_independent() const;
  bool driftless() const;

  /// Throws unless the field has one entry per atom of `mu`.
  void check_compatible(const SpinningMeasure& mu) const;

 private:
  std::vector<RayCoefficients> rays_;
};

/// Quadrature tolerance and radial tabulation shared by the analytic routines.
struct RadialGrid {
  double r_max = 10.0;
  std::size_t points = 1001;
  double abs_tol = 1e-10;

  std::vector<double> nodes(double domain_radius) const;
};

/// Cached quadrature on one ray: the exponent I(r) = int_0^r 2 g / sigma^2,
/// the scale s(r) = int_0^r exp(-I), and the speed density p(r) = exp(I) / sigma^2
/// with its antiderivative. Immutable after construction.
class RayQuadrature {
 public:
  RayQuadrature(const RayCoefficients& coeffs, const RadialGrid& grid);

  double exponent(double r) const;
  double scale(double r) const;
  double scale_derivative(double r) const;
  double speed_density(double r) const;
  /// int_0^r p
  double speed_mass(double r) const;
  /// int_a^b p, for arbitrary a < b (tail windows).
  double speed_mass_between(double a, double b) const;

  const RayCoefficients& coefficients() const { return coeffs_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> scale_at_nodes() const { return scale_nodes_; }
  std::span<const double> speed_mass_at_nodes() const { return mass_nodes_; }
  double tolerance() const { return tol_; }

 private:
  std::size_t node_below(double r) const;
  double exponent_piece(double a, double b) const;
  double scale_piece(double a, double b) const;
  double mass_piece(double a, double b) const;

  RayCoefficients coeffs_;
  double tol_;
  std::vector<double> nodes_;
  std::vector<double> exponent_nodes_;
  std::vector<double> scale_nodes_;
  std::vector<double> mass_nodes_;
};

/// Drift-removing scale map per ray with inverse and transformed dispersion.
class ScaleTransform {
 public:
  ScaleTransform(const CoefficientField& field, const RadialGrid& grid);

  std::size_t size() const { return rays_.size(); }
  double scale(std::size_t ray, double r) const { return rays_[ray]->scale(r); }
  double derivative(std::size_t ray, double r) const { return rays_[ray]->scale_derivative(r); }
  /// Monotone bisection, absolute accuracy 1e-10 * max(1, r).
  double inverse(std::size_t ray, double y) const;
  /// Dispersion of the scaled process at scaled radius y.
  double transformed_dispersion(std::size_t ray, double y) const;
  const RayQuadrature& quadrature(std::size_t ray) const { return *rays_[ray]; }

 private:
  std::vector<std::shared_ptr<const RayQuadrature>> rays_;
};

ScaleTransform scale_transform(const CoefficientField& field, const RadialGrid& grid);

/// Stationary law of the reflected radial diffusion on one ray.
struct RadialStationary {
  std::vector<double> r;
  std::vector<double> density;     // normalized when `finite`, else unnormalized
  std::vector<double> cumulative;  // same convention as density
  double normalizer = kInfinity;   // C = int p, infinity when divergent
  bool finite = false;
  double mean_radius = kInfinity;
};

RadialStationary stationary_radial(const CoefficientField& field, std::size_t ray,
                                   const RadialGrid& grid);

/// Normalizer of p on one ray; infinity when the tail-ratio test flags divergence.
double speed_normalizer(const RayQuadrature& ray);

class NonNormalizableError : public DomainError {
 public:
  NonNormalizableError(const std::string& what, std::size_t ray) : DomainError(what), ray_(ray) {}
  std::size_t ray() const { return ray_; }

 private:
  std::size_t ray_;
};

/// Stationary distribution of the spider: ray masses proportional to C_i mu_i
/// and per-ray normalized radial laws, with cdf and quantile queries.
class StationaryProfile {
 public:
  StationaryProfile(const CoefficientField& field, const SpinningMeasure& mu,
                    const RadialGrid& grid);

  std::size_t size() const { return masses_.size(); }
  std::span<const double> masses() const { return masses_; }
  std::span<const double> normalizers() const { return normalizers_; }
  const RadialStationary& radial(std::size_t ray) const { return radial_[ray]; }

  double density(std::size_t ray, double r) const;
  double cdf(std::size_t ray, double r) const;
  double quantile(std::size_t ray, double u) const;

  /// Law of the radius irrespective of the ray.
  double pooled_cdf(double r) const;
  double pooled_quantile(double u) const;

  /// Exact inverse-CDF draw from two uniforms.
  TreePoint sample(double u_ray, double u_radius) const;

  /// CSV rows: ray id, r, density, cumulative (normalized, on the grid).
  void write_csv(std::ostream& out, const SpinningMeasure& mu) const;

 private:
  std::vector<std::shared_ptr<const RayQuadrature>> rays_;
  std::vector<double> masses_;
  std::vector<double> normalizers_;
  std::vector<double> domain_;
  std::vector<RadialStationary> radial_;
};

StationaryProfile spider_stationary(const CoefficientField& field, const SpinningMeasure& mu,
                                    const RadialGrid& grid);

/// Radial representation of a test function: value and first two radial
/// derivatives on each ray (ray index, r).
struct TestFunction {
  std::function<double(std::size_t, double)> value;
  std::function<double(std::size_t, double)> d1;
  std::function<double(std::size_t, double)> d2;

  static TestFunction constant(double c);
  /// r^k on every ray, k >= 1.
  static TestFunction power(double k);
  /// c_i * r on ray i (linear with ray-dependent slope).
  static TestFunction ray_linear(std::vector<double> slopes);
};

/// Weighted outward flux sum_i mu_i f'(0+, theta_i); zero for the domain class.
double origin_flux(const SpinningMeasure& mu, const TestFunction& f);

/// g f' + sigma^2 f'' / 2 on one ray, no domain-class check.
double ray_generator(const CoefficientField& field, std::size_t ray, const TestFunction& f,
                     double r);

class DomainClassError : public DomainError {
 public:
  DomainClassError(const std::string& what, double flux) : DomainError(what), flux_(flux) {}
  double flux() const { return flux_; }

 private:
  double flux_;
};

/// Generator of the Walsh diffusion applied to f at x. f must satisfy the
/// gluing condition sum_i mu_i f'(0+, theta_i) = 0 (within 1e-8), otherwise
/// DomainClassError carries the flux. At the origin the ray values are averaged
/// with weights mu_i / sigma_i^2(0), the near-origin occupation split.
double apply_generator(const CoefficientField& field, const SpinningMeasure& mu,
                       const TestFunction& f, const TreePoint& x);

enum class LyapunovMode { general_grid, constant_closed_form, bang_bang };

std::string to_string(LyapunovMode mode);

struct LyapunovGrid {
  std::vector<double> lambdas;
  std::vector<double> xs;

  /// 200 log-spaced lambdas in [1e-3, 50]; 400 x in (0, 50].
  static LyapunovGrid defaults();
};

struct ClosedForm {
  double lambda;
  double k;
};

struct LyapunovReport {
  bool certified = false;
  double lambda_star = 0.0;
  double k = 0.0;
  std::vector<double> xs;
  std::vector<double> K_curve;  // K(x, lambda_star) on xs
  LyapunovMode mode = LyapunovMode::general_grid;
  std::optional<ClosedForm> closed_form;
};

/// K(x, lambda) = gbar(x) lambda + sbar(x)^2 lambda^2 / 2.
double lyapunov_K(const RadialCoefficient& gbar, const RadialCoefficient& sbar, double x,
                  double lambda);

/// Maximizes k(lambda) = -sup_x K(x, lambda) over the grid, then refines by
/// golden section between the neighbouring grid lambdas (k is concave).
LyapunovReport lyapunov_optimize(const RadialCoefficient& gbar, const RadialCoefficient& sbar,
                                 const LyapunovGrid& grid,
                                 LyapunovMode hint = LyapunovMode::general_grid);

struct Envelope {
  RadialCoefficient gbar;
  RadialCoefficient sbar;
  LyapunovMode mode;
};

/// Drift envelope as the pointwise max over rays, tabulated on `xs` unless
/// every drift is constant. Requires angular-independent dispersion. A
/// two-ray field with constant drifts and unit dispersion is tagged bang_bang.
Envelope drift_envelope(const CoefficientField& field, std::span<const double> xs);

LyapunovReport lyapunov_for_field(const CoefficientField& field, const LyapunovGrid& grid);

}  // namespace walsh
