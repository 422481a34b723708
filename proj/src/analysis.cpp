#include "walsh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "walsh/ensemble.hpp"

namespace walsh {

// ---------------------------------------------------------------------------
// Binning

SpiderBinning::SpiderBinning(std::vector<std::vector<double>> edges) : edges_(std::move(edges)) {
  if (edges_.empty()) throw DomainError("binning needs at least one ray");
  offsets_.push_back(0);
  for (const auto& e : edges_) {
    if (e.empty() || e.front() != 0.0) throw DomainError("bin edges must start at 0");
    for (std::size_t k = 1; k < e.size(); ++k)
      if (!(e[k] > e[k - 1])) throw DomainError("bin edges must increase strictly");
    offsets_.push_back(offsets_.back() + e.size());
  }
}

SpiderBinning SpiderBinning::equal_probability(const StationaryProfile& profile,
                                               std::size_t cells) {
  const std::size_t rays = profile.size();
  if (cells < rays) throw DomainError("need at least one cell per ray");
  // Largest-remainder apportionment with a floor of one cell per ray.
  std::vector<std::size_t> per_ray(rays, 1);
  std::size_t left = cells - rays;
  std::vector<double> want(rays);
  for (std::size_t i = 0; i < rays; ++i)
    want[i] = std::max(0.0, profile.masses()[i] * static_cast<double>(cells) - 1.0);
  for (std::size_t i = 0; i < rays; ++i) {
    const auto whole = std::min(left, static_cast<std::size_t>(std::floor(want[i])));
    per_ray[i] += whole;
    left -= whole;
    want[i] -= static_cast<double>(whole);
  }
  while (left > 0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rays; ++i)
      if (want[i] > want[best]) best = i;
    ++per_ray[best];
    want[best] -= 1.0;
    --left;
  }
  std::vector<std::vector<double>> edges(rays);
  for (std::size_t i = 0; i < rays; ++i) {
    edges[i].push_back(0.0);
    for (std::size_t j = 1; j < per_ray[i]; ++j)
      edges[i].push_back(
          profile.quantile(i, static_cast<double>(j) / static_cast<double>(per_ray[i])));
  }
  return SpiderBinning(std::move(edges));
}

SpiderBinning SpiderBinning::equal_width(std::size_t rays, double r_max, std::size_t bins_per_ray) {
  if (bins_per_ray == 0 || !(r_max > 0.0)) throw DomainError("equal-width binning needs bins and r_max > 0");
  std::vector<double> e;
  for (std::size_t j = 0; j < bins_per_ray; ++j)
    e.push_back(r_max * static_cast<double>(j) / static_cast<double>(bins_per_ray));
  return SpiderBinning(std::vector<std::vector<double>>(rays, e));
}

std::size_t SpiderBinning::cell_of(const TreePoint& x) const {
  if (x.is_origin()) return 0;
  if (x.ray < 0 || static_cast<std::size_t>(x.ray) >= edges_.size())
    throw DomainError("sample on unknown ray " + std::to_string(x.ray));
  const auto& e = edges_[static_cast<std::size_t>(x.ray)];
  const auto j = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), x.radius) - e.begin()) - 1;
  return 1 + offsets_[static_cast<std::size_t>(x.ray)] + j;
}

int SpiderBinning::ray_of(std::size_t cell) const {
  if (cell == 0) return -1;
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), cell - 1);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

double SpiderBinning::lower_edge(std::size_t cell) const {
  if (cell == 0) return 0.0;
  const auto ray = static_cast<std::size_t>(ray_of(cell));
  return edges_[ray][cell - 1 - offsets_[ray]];
}

double SpiderBinning::upper_edge(std::size_t cell) const {
  if (cell == 0) return 0.0;
  const auto ray = static_cast<std::size_t>(ray_of(cell));
  const std::size_t j = cell - 1 - offsets_[ray];
  return j + 1 < edges_[ray].size() ? edges_[ray][j + 1] : kInfinity;
}

std::vector<double> SpiderBinning::masses_under(const StationaryProfile& profile) const {
  if (profile.size() != rays()) throw DomainError("profile and binning disagree on the ray count");
  std::vector<double> m(cell_count(), 0.0);
  for (std::size_t c = 1; c < m.size(); ++c) {
    const auto ray = static_cast<std::size_t>(ray_of(c));
    const double hi = upper_edge(c);
    const double upper = std::isinf(hi) ? 1.0 : profile.cdf(ray, hi);
    m[c] = profile.masses()[ray] * (upper - profile.cdf(ray, lower_edge(c)));
  }
  return m;
}

SpiderHistogram spider_histogram(std::span<const TreePoint> samples, const SpiderBinning& binning) {
  if (samples.empty()) throw DomainError("histogram needs at least one sample");
  SpiderHistogram h{binning, std::vector<double>(binning.cell_count(), 0.0),
                    std::vector<double>(binning.cell_count(), 0.0), samples.size()};
  std::vector<std::size_t> counts(binning.cell_count(), 0);
  for (const TreePoint& x : samples) {
    const std::size_t c = binning.cell_of(x);
    ++counts[c];
    h.cell_max[c] = std::max(h.cell_max[c], x.radius);
  }
  const double n = static_cast<double>(samples.size());
  for (std::size_t c = 0; c < counts.size(); ++c) h.masses[c] = static_cast<double>(counts[c]) / n;
  return h;
}

SpiderHistogram reference_histogram(const SpiderBinning& binning, std::vector<double> masses) {
  if (masses.size() != binning.cell_count()) throw DomainError("mass vector does not match the binning");
  SpiderHistogram h{binning, std::move(masses), std::vector<double>(binning.cell_count(), 0.0), 0};
  return h;
}

double tv_distance(const SpiderHistogram& a, const SpiderHistogram& b,
                   std::optional<double> weight_lambda) {
  if (!(a.binning == b.binning)) throw DomainError("histograms use different binnings");
  double sum = 0.0;
  for (std::size_t c = 0; c < a.masses.size(); ++c) {
    const double diff = std::abs(a.masses[c] - b.masses[c]);
    if (!weight_lambda) {
      sum += diff;
      continue;
    }
    double top = a.binning.upper_edge(c);
    if (std::isinf(top)) top = std::max({a.cell_max[c], b.cell_max[c], a.binning.lower_edge(c)});
    sum += std::exp(*weight_lambda * top) * diff;
  }
  return weight_lambda ? sum : 0.5 * sum;
}

double tv_standard_error(const SpiderHistogram& a, const SpiderHistogram& b) {
  if (!(a.binning == b.binning)) throw DomainError("histograms use different binnings");
  // TV = (1/2) sum s_c (a_c - b_c) with s_c the sign of the difference.
  auto variance = [&](const SpiderHistogram& h) {
    if (h.count == 0) return 0.0;
    double first = 0.0, second = 0.0;
    for (std::size_t c = 0; c < h.masses.size(); ++c) {
      const double d = a.masses[c] - b.masses[c];
      const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      first += s * h.masses[c];
      second += s * s * h.masses[c];
    }
    return (second - first * first) / static_cast<double>(h.count);
  };
  return 0.5 * std::sqrt(variance(a) + variance(b));
}

double tv_noise_floor(std::span<const double> masses, std::size_t samples) {
  double s = 0.0;
  for (double m : masses) s += std::sqrt(2.0 * m * (1.0 - m) / (std::numbers::pi * static_cast<double>(samples)));
  return 0.5 * s;
}

OccupationReport occupation_fractions(const WalshPath& path, std::size_t rays,
                                      const SpiderBinning* binning, double burn_in) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw DomainError("burn-in fraction must lie in [0, 1)");
  OccupationReport rep;
  rep.ray_fraction.assign(rays, 0.0);
  if (binning) rep.cell_fraction.assign(binning->cell_count(), 0.0);
  const auto start = static_cast<std::size_t>(std::ceil(burn_in * static_cast<double>(path.size() - 1)));
  std::size_t origin = 0;
  std::vector<std::size_t> per_ray(rays, 0), per_cell(binning ? binning->cell_count() : 0, 0);
  for (std::size_t k = start; k < path.size(); ++k) {
    const TreePoint& x = path.states[k];
    if (x.is_origin())
      ++origin;
    else if (static_cast<std::size_t>(x.ray) < rays)
      ++per_ray[static_cast<std::size_t>(x.ray)];
    else
      throw DomainError("path visits unknown ray " + std::to_string(x.ray));
    if (binning) ++per_cell[binning->cell_of(x)];
  }
  rep.nodes = path.size() - start;
  const double n = static_cast<double>(rep.nodes);
  for (std::size_t i = 0; i < rays; ++i) rep.ray_fraction[i] = static_cast<double>(per_ray[i]) / n;
  rep.origin_fraction = static_cast<double>(origin) / n;
  for (std::size_t c = 0; c < per_cell.size(); ++c)
    rep.cell_fraction[c] = static_cast<double>(per_cell[c]) / n;
  return rep;
}

// ---------------------------------------------------------------------------
// Fitting

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("least squares needs matching samples, n >= 2");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("least squares needs distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

DecayFit fit_decay_rate(std::vector<double> times, std::vector<double> values, double noise_floor) {
  if (times.size() != values.size()) throw DomainError("times and values differ in length");
  DecayFit fit;
  fit.times = std::move(times);
  fit.values = std::move(values);
  fit.noise_floor = noise_floor;
  std::size_t end = 0;
  while (end < fit.values.size() && fit.values[end] > noise_floor) ++end;
  fit.window_begin = 0;
  fit.window_end = end;
  if (end < 4)
    throw FitRefused("only " + std::to_string(end) + " points above the noise floor " +
                     std::to_string(noise_floor) + "; at least 4 required");
  std::vector<double> logs;
  for (std::size_t k = 0; k < end; ++k) logs.push_back(std::log(fit.values[k]));
  const LinearFit lf = least_squares(std::span(fit.times).first(end), logs);
  fit.rate = -lf.slope;
  fit.intercept = lf.intercept;
  fit.se = lf.slope_se;
  return fit;
}

// ---------------------------------------------------------------------------
// Couplings and the Hoelder bound

Estimate mean_estimate(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("mean of an empty sample");
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate coupling_cost(std::span<const double> sup_distances, double q) {
  if (!(q >= 1.0)) throw DomainError("coupling cost needs q >= 1");
  std::vector<double> powered;
  powered.reserve(sup_distances.size());
  for (double d : sup_distances) powered.push_back(std::pow(d, q));
  const Estimate m = mean_estimate(powered);
  if (m.value <= 0.0) return {0.0, 0.0};
  const double value = std::pow(m.value, 1.0 / q);
  return {value, value / (q * m.value) * m.se};
}

double holder_c1(double p, double q, double horizon) {
  if (!(q < p)) throw DomainError("C1 needs q < p");
  const double r1 = p / (p - q);
  return std::pow(2.0 * horizon, q / 2.0) * std::pow(std::numbers::pi, -1.0 / (2.0 * r1)) *
         std::exp(std::lgamma((1.0 + q * r1) / 2.0) / r1);
}

double holder_rho(double p, double r) {
  if (!(p > 0.0) || !(r > 0.0)) throw DomainError("rho needs p, r > 0");
  return p * r / ((1.0 + p) * r + p);
}

void check_holder_admissible(double p, double q, double rho) {
  if (!(q >= 1.0 && q < p))
    throw DomainError("inadmissible exponents: need 1 <= q < p, got q = " + std::to_string(q) +
                      ", p = " + std::to_string(p));
  if (!(rho > 0.0 && rho < p / (p + 1.0)))
    throw DomainError("inadmissible rho " + std::to_string(rho) + ": need 0 < rho < p/(p+1) = " +
                      std::to_string(p / (p + 1.0)));
}

BoundConstants holder_constants(double p, double q, double rho, double horizon) {
  check_holder_admissible(p, q, rho);
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  return {holder_c1(p, q, horizon), rho, p / (p - q), true};
}

HolderReport holder_bound_check(double p, double q, double rho, double horizon,
                                std::vector<double> eps, std::vector<double> wasserstein,
                                std::vector<Estimate> cost, double min_slope) {
  HolderReport rep;
  rep.constants = holder_constants(p, q, rho, horizon);
  if (eps.size() != wasserstein.size() || eps.size() != cost.size() || eps.size() < 2)
    throw DomainError("cost curve needs matching eps, distance and cost entries (>= 2)");
  // Order by decreasing eps.
  std::vector<std::size_t> order(eps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return eps[a] > eps[b]; });
  for (auto i : order) {
    rep.eps.push_back(eps[i]);
    rep.wasserstein.push_back(wasserstein[i]);
    rep.cost.push_back(cost[i]);
  }
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.cost.size(); ++k)
    rep.monotone &= rep.cost[k].value < rep.cost[k - 1].value;
  rep.fitted_c = rep.cost[0].value / std::pow(rep.wasserstein[0], rho);
  rep.bound_holds = true;
  for (std::size_t k = 0; k < rep.cost.size(); ++k)
    rep.bound_holds &=
        rep.cost[k].value <= rep.fitted_c * std::pow(rep.wasserstein[k], rho) * (1.0 + 1e-12);
  std::vector<double> lx, ly;
  bool positive = true;
  for (std::size_t k = 0; k < rep.cost.size(); ++k) {
    positive &= rep.cost[k].value > 0.0 && rep.wasserstein[k] > 0.0;
    if (positive) {
      lx.push_back(std::log(rep.wasserstein[k]));
      ly.push_back(std::log(rep.cost[k].value));
    }
  }
  if (positive) rep.loglog = least_squares(lx, ly);
  rep.pass = positive && rep.monotone && rep.bound_holds && rep.loglog.slope >= min_slope;
  return rep;
}

// ---------------------------------------------------------------------------
// Partition of local time, generator

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

std::vector<PartitionResult> partition_of_local_time_check(
    std::span<const double> totals, const std::vector<std::vector<double>>& splits,
    const SpinningMeasure& mu, const std::vector<std::vector<bool>>& subsets, double tolerance) {
  if (splits.size() != subsets.size()) throw DomainError("one split series per subset required");
  const std::size_t n = totals.size();
  const double sum_total = std::accumulate(totals.begin(), totals.end(), 0.0);
  std::vector<PartitionResult> out;
  for (std::size_t a = 0; a < subsets.size(); ++a) {
    PartitionResult r;
    r.mass = mu.mass(subsets[a]);
    if (splits[a].size() != n) throw DomainError("split series length differs from totals");
    if (!(sum_total > 0.0)) {
      out.push_back(r);
      continue;
    }
    const double sum_split = std::accumulate(splits[a].begin(), splits[a].end(), 0.0);
    r.ratio = sum_split / sum_total;
    if (n > 1) {
      const double mean_total = sum_total / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double resid = splits[a][i] - r.ratio * totals[i];
        ss += resid * resid;
      }
      r.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) / mean_total;
    }
    r.ci_low = r.ratio - 1.96 * r.se;
    r.ci_high = r.ratio + 1.96 * r.se;
    r.status = r.mass >= r.ci_low - tolerance && r.mass <= r.ci_high + tolerance
                   ? CheckStatus::pass
                   : CheckStatus::fail;
    out.push_back(r);
  }
  return out;
}

GeneratorReport generator_consistency_check(const CoefficientField& field,
                                            const SpinningMeasure& mu, const TestFunction& f,
                                            const TreePoint& x, const std::vector<double>& hs,
                                            std::size_t paths, std::uint64_t seed,
                                            std::size_t substeps) {
  if (hs.empty() || paths < 2 || substeps == 0)
    throw DomainError("generator check needs step sizes, >= 2 paths and >= 1 substep");
  GeneratorReport rep;
  rep.generator = apply_generator(field, mu, f, x);
  rep.order = x.is_origin() ? 0.5 : 1.0;
  auto value = [&](const TreePoint& y) {
    return y.is_origin() ? f.value(0, 0.0) : f.value(static_cast<std::size_t>(y.ray), y.radius);
  };
  const double fx = value(x);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const double h = hs[k];
    SimConfig cfg;
    cfg.horizon = h;
    cfg.dt = h / static_cast<double>(substeps);
    cfg.seed = seed + k;
    cfg.path_count = paths;
    const TerminalSample ts = terminal_states(field, mu, x, cfg, {h}, Execution::parallel);
    std::vector<double> q;
    q.reserve(paths);
    for (const TreePoint& y : ts.states[0]) q.push_back((value(y) - fx) / h);
    const Estimate e = mean_estimate(q);
    rep.points.push_back({h, e.value, e.se, e.value - rep.generator});
  }
  // C from the coarser steps; the finest step is the out-of-sample check.
  std::size_t finest = 0;
  for (std::size_t k = 1; k < rep.points.size(); ++k)
    if (rep.points[k].h < rep.points[finest].h) finest = k;
  rep.fitted_c = 0.0;
  for (std::size_t k = 0; k < rep.points.size(); ++k)
    if (k != finest || rep.points.size() == 1)
      rep.fitted_c = std::max(rep.fitted_c, std::abs(rep.points[k].difference) / std::pow(rep.points[k].h, rep.order));
  bool ok = true;
  for (const auto& pt : rep.points)
    ok &= std::abs(pt.difference) <= rep.fitted_c * std::pow(pt.h, rep.order) + 3.0 * pt.se;
  rep.status = ok ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

// ---------------------------------------------------------------------------
// Goodness of fit

double chi_square_survival(double statistic, std::size_t dof) {
  if (dof == 0) throw DomainError("chi-square needs at least one degree of freedom");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * static_cast<double>(dof), 0.5 * statistic);
}

ChiSquare chi_square_test(std::span<const double> observed, std::span<const double> probabilities) {
  if (observed.size() != probabilities.size() || observed.size() < 2)
    throw DomainError("chi-square needs matching observed/expected bins (>= 2)");
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  ChiSquare out;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = n * probabilities[k];
    if (!(e > 0.0)) throw DomainError("chi-square bin with zero expected count");
    out.statistic += (observed[k] - e) * (observed[k] - e) / e;
  }
  out.dof = observed.size() - 1;
  out.p_value = chi_square_survival(out.statistic, out.dof);
  return out;
}

ChiSquare poisson_chi_square(std::span<const std::size_t> samples, double mean) {
  if (samples.empty() || !(mean > 0.0)) throw DomainError("Poisson test needs samples and mean > 0");
  const double n = static_cast<double>(samples.size());
  // Single bins while both the bin and the remaining tail expect >= 5 counts.
  std::vector<double> probs;
  double pk = std::exp(-mean);
  double cumulative = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double tail = 1.0 - cumulative - pk;
    if (n * pk < 5.0 || n * tail < 5.0) {
      probs.push_back(1.0 - cumulative);
      break;
    }
    probs.push_back(pk);
    cumulative += pk;
    pk *= mean / static_cast<double>(k + 1);
  }
  if (probs.size() < 2) throw DomainError("too few samples for a Poisson goodness-of-fit test");
  const std::size_t last = probs.size() - 1;
  std::vector<double> observed(probs.size(), 0.0);
  for (std::size_t s : samples) observed[std::min(s, last)] += 1.0;
  return chi_square_test(observed, probs);
}

KolmogorovSmirnov ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  if (lambda < 0.2) {
    p = 1.0;
  } else {
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      p += (k % 2 == 1 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return {d, p};
}

}  // namespace walsh
