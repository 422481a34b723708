#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "walsh/geometry.hpp"
#include "walsh/model.hpp"
#include "walsh/simulate.hpp"

namespace walsh {

// ---------------------------------------------------------------------------
// Histograms on the spider

/// Cells of the spider: per-ray radial bins plus one cell for the origin.
/// Cell 0 is the origin; ray i owns a contiguous block of cells.
class SpiderBinning {
 public:
  /// `edges[i]` are the bin edges of ray i: strictly increasing, starting at 0;
  /// the last bin is open to infinity.
  explicit SpiderBinning(std::vector<std::vector<double>> edges);

  /// `cells` radial cells split across rays proportionally to the stationary
  /// ray masses (at least one per ray); equal probability within a ray.
  static SpiderBinning equal_probability(const StationaryProfile& profile, std::size_t cells);
  static SpiderBinning equal_width(std::size_t rays, double r_max, std::size_t bins_per_ray);

  std::size_t cell_count() const { return 1 + offsets_.back(); }
  std::size_t rays() const { return edges_.size(); }
  std::size_t cell_of(const TreePoint& x) const;
  /// Ray index of a cell, -1 for the origin cell.
  int ray_of(std::size_t cell) const;
  double lower_edge(std::size_t cell) const;
  double upper_edge(std::size_t cell) const;  // infinity for the last bin of a ray
  const std::vector<double>& edges(std::size_t ray) const { return edges_[ray]; }

  /// Cell masses of the stationary law (origin cell 0).
  std::vector<double> masses_under(const StationaryProfile& profile) const;

  friend bool operator==(const SpiderBinning&, const SpiderBinning&) = default;

 private:
  std::vector<std::vector<double>> edges_;
  std::vector<std::size_t> offsets_;  // first radial cell of ray i is 1 + offsets_[i]
};

struct SpiderHistogram {
  SpiderBinning binning;
  std::vector<double> masses;
  std::vector<double> cell_max;  // largest sampled radius per cell (0 when empty)
  std::size_t count = 0;         // 0 for analytic reference histograms
};

SpiderHistogram spider_histogram(std::span<const TreePoint> samples, const SpiderBinning& binning);
SpiderHistogram reference_histogram(const SpiderBinning& binning, std::vector<double> masses);

/// Unweighted: half the L1 distance of the cell masses. Weighted with
/// V(r) = exp(lambda r): sum over cells of sup_cell V times |m1 - m2|, the sup
/// of an unbounded last cell taken at the largest observed radius.
double tv_distance(const SpiderHistogram& a, const SpiderHistogram& b,
                   std::optional<double> weight_lambda = std::nullopt);

/// Standard error of the plug-in TV between two sampled histograms (for a
/// reference histogram the count is 0 and its term vanishes).
double tv_standard_error(const SpiderHistogram& a, const SpiderHistogram& b);

/// Expected TV between an N-sample histogram and its own cell law.
double tv_noise_floor(std::span<const double> masses, std::size_t samples);

struct OccupationReport {
  std::vector<double> ray_fraction;  // by atom index
  double origin_fraction = 0.0;
  std::vector<double> cell_fraction;  // empty without a binning
  std::size_t nodes = 0;              // nodes after burn-in
};

OccupationReport occupation_fractions(const WalshPath& path, std::size_t rays,
                                      const SpiderBinning* binning = nullptr,
                                      double burn_in = 0.1);

// ---------------------------------------------------------------------------
// Rate fitting

struct DecayFit {
  std::vector<double> times;
  std::vector<double> values;
  double noise_floor = 0.0;
  std::size_t window_begin = 0;  // [begin, end) indices used by the fit
  std::size_t window_end = 0;
  double rate = 0.0;
  double intercept = 0.0;
  double se = 0.0;
};

class FitRefused : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Least squares of log(value) against time over the leading points strictly
/// above the noise floor. Needs at least four such points.
DecayFit fit_decay_rate(std::vector<double> times, std::vector<double> values,
                        double noise_floor);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Couplings and the Hoelder bound

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// E[sup ||X - Xbar||^q]^(1/q) from per-pair sup distances, delta-method se.
Estimate coupling_cost(std::span<const double> sup_distances, double q);

struct BoundConstants {
  double c1 = 0.0;
  double rho = 0.0;
  double r1 = 0.0;
  bool admissible = false;
};

/// (2T)^(q/2) pi^(-1/(2 r1)) Gamma((1 + q r1)/2)^(1/r1) with r1 = p/(p - q).
double holder_c1(double p, double q, double horizon);
/// p r / ((1 + p) r + p).
double holder_rho(double p, double r);
/// Throws DomainError unless 1 <= q < p and 0 < rho < p/(p+1).
void check_holder_admissible(double p, double q, double rho);
BoundConstants holder_constants(double p, double q, double rho, double horizon);

struct HolderReport {
  BoundConstants constants;
  std::vector<double> eps;
  std::vector<double> wasserstein;
  std::vector<Estimate> cost;
  double fitted_c = 0.0;   // cost / W^rho at the largest eps
  LinearFit loglog;        // log cost against log W
  bool monotone = false;   // cost strictly decreasing as eps decreases
  bool bound_holds = false;
  bool pass = false;
};

HolderReport holder_bound_check(double p, double q, double rho, double horizon,
                                std::vector<double> eps, std::vector<double> wasserstein,
                                std::vector<Estimate> cost, double min_slope = 0.3);

// ---------------------------------------------------------------------------
// Local-time partition and generator

enum class CheckStatus { pass, fail, inconclusive };
std::string to_string(CheckStatus s);

struct PartitionResult {
  double mass = 0.0;   // mu(A)
  double ratio = 0.0;  // sum Lambda_A / sum Lambda
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  CheckStatus status = CheckStatus::inconclusive;
};

/// Ratio estimator per subset over paths with a 95% CI; a subset passes when
/// mu(A) lies within the CI widened by `tolerance`.
std::vector<PartitionResult> partition_of_local_time_check(
    std::span<const double> totals, const std::vector<std::vector<double>>& splits,
    const SpinningMeasure& mu, const std::vector<std::vector<bool>>& subsets,
    double tolerance = 0.03);

struct GeneratorPoint {
  double h = 0.0;
  double estimate = 0.0;  // (E f(X_h) - f(x)) / h
  double se = 0.0;
  double difference = 0.0;  // estimate - Lf(x)
};

struct GeneratorReport {
  double generator = 0.0;  // Lf(x)
  double order = 1.0;      // declared convergence order in h
  double fitted_c = 0.0;
  std::vector<GeneratorPoint> points;
  CheckStatus status = CheckStatus::inconclusive;
};

/// Monte Carlo difference quotients at each h (Euler step h / substeps)
/// against apply_generator. C is the largest |difference| / h^order over all
/// but the finest step; the check passes when the finest step also satisfies
/// |difference| <= C h^order + 3 se. The declared order is 1 away from the
/// origin and 1/2 at the origin.
GeneratorReport generator_consistency_check(const CoefficientField& field,
                                            const SpinningMeasure& mu, const TestFunction& f,
                                            const TreePoint& x, const std::vector<double>& hs,
                                            std::size_t paths, std::uint64_t seed,
                                            std::size_t substeps = 20);

// ---------------------------------------------------------------------------
// Goodness of fit

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson test of observed counts against expected probabilities (summing to 1).
ChiSquare chi_square_test(std::span<const double> observed, std::span<const double> probabilities);

/// Poisson(mean) goodness of fit for nonnegative integer samples; bins with
/// expected count below 5 are merged into the tail.
ChiSquare poisson_chi_square(std::span<const std::size_t> samples, double mean);

double chi_square_survival(double statistic, std::size_t dof);

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KolmogorovSmirnov {
  double statistic = 0.0;
  double p_value = 1.0;
};
KolmogorovSmirnov ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Sample mean and standard error of the mean.
Estimate mean_estimate(std::span<const double> xs);

}  // namespace walsh
