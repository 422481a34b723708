#include "walsh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/version.hpp>
#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "walsh/analysis.hpp"
#include "walsh/csv.hpp"
#include "walsh/error.hpp"

namespace walsh {

using nlohmann::ordered_json;

namespace {

ordered_json number_or_null(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(); }

std::string verdict_of(CheckStatus s) { return to_string(s); }

TreePoint start_of(const ExperimentConfig& cfg) {
  const toml::Value* p = cfg.param("start");
  return p ? cfg.point(*p) : TreePoint::origin();
}

RadialGrid grid_of(const ExperimentConfig& cfg) {
  RadialGrid g;
  g.r_max = cfg.number("r_max", g.r_max);
  g.points = cfg.count("grid_points", g.points);
  return g;
}

// ---------------------------------------------------------------------------

Report run_simulate(const ExperimentConfig& cfg, const RunOptions& opt) {
  const SpinningMeasure mu = cfg.measure();
  const WalshPath path = simulate_walsh_diffusion(cfg.field(), mu, start_of(cfg), cfg.sim, 0);
  const std::size_t thin = opt.thin.value_or(cfg.count("thin", 1));
  std::ostringstream out;
  write_path_csv(out, path, mu, thin);

  Report r{"simulate", {{"path.csv", out.str()}}, {}};
  const TreePoint& last = path.states.back();
  r.summary.estimate = last.radius;
  r.summary.window = std::pair{0.0, path.time(path.size() - 1)};
  auto& d = r.summary.details;
  d["nodes"] = path.size();
  d["thin"] = thin;
  d["terminal_ray"] = last.is_origin() ? ordered_json() : ordered_json(mu.atom(last.ray).direction.id);
  d["excursions"] = path.excursion.empty() ? 0u : *std::max_element(path.excursion.begin(), path.excursion.end());
  if (path.explosion) {
    d["explosion_time"] = path.explosion->time;
    d["explosion_ray"] = mu.atom(path.explosion->ray).direction.id;
  }
  return r;
}

Report run_stationary(const ExperimentConfig& cfg) {
  const SpinningMeasure mu = cfg.measure();
  Report r{"stationary", {}, {}};
  std::ostringstream out;
  try {
    const StationaryProfile profile(cfg.field(), mu, grid_of(cfg));
    profile.write_csv(out, mu);
    double mean = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i)
      mean += profile.masses()[i] * profile.radial(i).mean_radius;
    r.summary.estimate = mean;
    r.summary.window = std::pair{0.0, cfg.number("r_max", RadialGrid{}.r_max)};
    ordered_json masses = ordered_json::array();
    for (std::size_t i = 0; i < profile.size(); ++i)
      masses.push_back({{"ray", mu.atom(i).direction.id},
                        {"mass", profile.masses()[i]},
                        {"normalizer", profile.normalizers()[i]},
                        {"mean_radius", number_or_null(profile.radial(i).mean_radius)}});
    r.summary.details["quantity"] = "mean radius under the stationary law";
    r.summary.details["rays"] = masses;
  } catch (const NonNormalizableError& e) {
    csv::Writer w(out, {"ray", "r", "density", "cumulative"});
    r.summary.verdict = "fail";
    r.summary.details["reason"] = e.what();
    r.summary.details["ray"] = mu.atom(e.ray()).direction.id;
  }
  r.tables.push_back({"stationary.csv", out.str()});
  return r;
}

Report run_occupation(const ExperimentConfig& cfg, const RunOptions&) {
  const SpinningMeasure mu = cfg.measure();
  const CoefficientField field = cfg.field();
  const StationaryProfile profile(field, mu, RadialGrid{});
  const WalshPath path = simulate_walsh_diffusion(field, mu, start_of(cfg), cfg.sim, 0);
  const double burn_in = cfg.number("burn_in", 0.1);
  const double tol = cfg.number("tolerance", 0.05);
  const double tv_tol = cfg.number("tv_tolerance", 0.07);
  const std::size_t bins = cfg.count("bins", 40);

  const OccupationReport rays = occupation_fractions(path, mu.size(), nullptr, burn_in);

  // Pooled radial law: all rays folded onto one, equal-probability cells.
  std::vector<double> edges{0.0};
  for (std::size_t j = 1; j < bins; ++j) {
    const double q = profile.pooled_quantile(static_cast<double>(j) / static_cast<double>(bins));
    if (q > edges.back()) edges.push_back(q);
  }
  const SpiderBinning pooled({edges});
  WalshPath folded = path;
  for (TreePoint& x : folded.states)
    if (!x.is_origin()) x.ray = 0;
  const OccupationReport radial = occupation_fractions(folded, 1, &pooled, burn_in);
  std::vector<double> expected(pooled.cell_count(), 0.0);
  for (std::size_t c = 1; c < pooled.cell_count(); ++c) {
    const double hi = pooled.upper_edge(c);
    expected[c] = (std::isfinite(hi) ? profile.pooled_cdf(hi) : 1.0) - profile.pooled_cdf(pooled.lower_edge(c));
  }
  double tv = 0.0;
  for (std::size_t c = 0; c < expected.size(); ++c) tv += std::abs(radial.cell_fraction[c] - expected[c]);
  tv *= 0.5;

  std::ostringstream ray_csv;
  csv::Writer w(ray_csv, {"ray", "observed", "expected", "difference"});
  double worst = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double diff = rays.ray_fraction[i] - profile.masses()[i];
    worst = std::max(worst, std::abs(diff));
    w.field(mu.atom(i).direction.id).field(rays.ray_fraction[i]).field(profile.masses()[i]).field(diff);
    w.end_row();
  }
  std::ostringstream radial_csv;
  csv::Writer rw(radial_csv, {"cell", "lower", "upper", "observed", "expected"});
  for (std::size_t c = 0; c < expected.size(); ++c) {
    rw.field(c).field(pooled.lower_edge(c)).field(pooled.upper_edge(c));
    rw.field(radial.cell_fraction[c]).field(expected[c]);
    rw.end_row();
  }

  Report r{"occupation", {{"occupation.csv", ray_csv.str()}, {"radial.csv", radial_csv.str()}}, {}};
  const double t_end = path.time(path.size() - 1);
  r.summary.estimate = worst;
  r.summary.window = std::pair{burn_in * t_end, t_end};
  const bool pass = worst <= tol && tv <= tv_tol;
  r.summary.verdict = pass ? "pass" : "fail";
  auto& d = r.summary.details;
  d["quantity"] = "max abs deviation of ray occupation from stationary ray mass";
  d["tolerance"] = tol;
  d["pooled_radial_tv"] = tv;
  d["tv_tolerance"] = tv_tol;
  d["origin_fraction"] = rays.origin_fraction;
  d["nodes_after_burn_in"] = rays.nodes;
  if (path.explosion) d["explosion_time"] = path.explosion->time;
  return r;
}

Report run_tv_decay(const ExperimentConfig& cfg, const RunOptions& opt) {
  const SpinningMeasure mu = cfg.measure();
  const CoefficientField field = cfg.field();
  const StationaryProfile profile(field, mu, RadialGrid{});
  const std::vector<double> times = cfg.numbers("times", {1, 2, 3, 4, 5, 6});
  const std::size_t bins = cfg.count("bins", 40);
  const SpiderBinning binning = SpiderBinning::equal_probability(profile, bins);
  const std::vector<double> masses = binning.masses_under(profile);
  const SpiderHistogram reference = reference_histogram(binning, masses);
  const std::size_t n = cfg.sim.path_count;

  std::optional<double> lambda;
  std::optional<LyapunovReport> lyap;
  if (const toml::Value* w = cfg.param("weight_lambda")) {
    if (w->type == toml::Value::Type::string) {
      lyap = lyapunov_for_field(field, LyapunovGrid::defaults());
      if (!lyap->certified) throw DomainError("no Lyapunov exponent certified for the weighted distance");
      lambda = lyap->lambda_star;
    } else {
      lambda = w->number();
    }
  }

  const TerminalSample sample = terminal_states(field, mu, start_of(cfg), cfg.sim, times, opt.execution);
  const double floor = tv_noise_floor(masses, n);
  std::vector<double> tv, se, weighted, weighted_floor;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const SpiderHistogram h = spider_histogram(sample.states[k], binning);
    tv.push_back(tv_distance(h, reference));
    se.push_back(tv_standard_error(h, reference));
    if (lambda) {
      weighted.push_back(tv_distance(h, reference, lambda));
      double f = 0.0;
      for (std::size_t c = 0; c < masses.size(); ++c) {
        const double hi = binning.upper_edge(c);
        const double top = std::isfinite(hi) ? hi : h.cell_max[c];
        f += std::exp(*lambda * top) *
             std::sqrt(2.0 * masses[c] * (1.0 - masses[c]) / (std::numbers::pi * static_cast<double>(n)));
      }
      weighted_floor.push_back(f);
    }
  }

  std::ostringstream out;
  std::vector<std::string> header{"t", "tv", "tv_se", "noise_floor"};
  if (lambda) {
    header.push_back("tv_weighted");
    header.push_back("weighted_noise_floor");
  }
  csv::Writer w(out, header);
  for (std::size_t k = 0; k < times.size(); ++k) {
    w.field(times[k]).field(tv[k]).field(se[k]).field(floor);
    if (lambda) w.field(weighted[k]).field(weighted_floor[k]);
    w.end_row();
  }

  Report r{"tv-decay", {{"decay.csv", out.str()}}, {}};
  auto& d = r.summary.details;
  const double lo = cfg.number("rate_min", 0.3), hi = cfg.number("rate_max", 0.8);
  d["rate_bracket"] = {lo, hi};
  d["noise_floor"] = floor;
  d["bins"] = binning.cell_count();
  d["paths"] = n;
  d["exploded_paths"] = std::count(sample.exploded.begin(), sample.exploded.end(), 1);
  try {
    const DecayFit fit = fit_decay_rate(times, tv, floor);
    r.summary.estimate = fit.rate;
    r.summary.se = fit.se;
    r.summary.window = std::pair{times[fit.window_begin], times[fit.window_end - 1]};
    d["intercept"] = fit.intercept;
    r.summary.verdict = fit.rate >= lo && fit.rate <= hi ? "pass" : "fail";
  } catch (const FitRefused& e) {
    r.summary.verdict = "inconclusive";
    d["reason"] = e.what();
  }
  if (lambda) {
    ordered_json wj;
    wj["lambda"] = *lambda;
    wj["convention"] = "per-cell supremum of exp(lambda r); open last cell at the largest sampled radius";
    // The weighted floor moves with the largest sampled radius; use its largest value.
    const double wf = *std::max_element(weighted_floor.begin(), weighted_floor.end());
    try {
      const DecayFit fit = fit_decay_rate(times, weighted, wf);
      wj["rate"] = fit.rate;
      wj["se"] = fit.se;
      wj["window"] = {times[fit.window_begin], times[fit.window_end - 1]};
      if (lyap) {
        const bool ok = fit.rate >= 0.5 * lyap->k && fit.rate <= 2.0 * lyap->k;
        wj["lyapunov_k"] = lyap->k;
        wj["bracket"] = {0.5 * lyap->k, 2.0 * lyap->k};
        wj["within_bracket"] = ok;
        if (!ok && r.summary.verdict == "pass") r.summary.verdict = "fail";
      }
    } catch (const FitRefused& e) {
      wj["reason"] = e.what();
      if (lyap && r.summary.verdict == "pass") r.summary.verdict = "inconclusive";
    }
    d["weighted"] = wj;
  }
  return r;
}

Report run_coupling_holder(const ExperimentConfig& cfg, const RunOptions& opt) {
  const SpinningMeasure first = cfg.measure();
  const double p = cfg.number("p", 2.0), q = cfg.number("q", 1.0);
  const double rho = cfg.param("rho") ? cfg.number("rho", 0.0) : holder_rho(p, cfg.number("r", 1.0));
  std::vector<double> eps = cfg.numbers("eps", {0.4, 0.2, 0.1, 0.05});

  Direction extra;
  int next_id = 0;
  for (const Atom& a : first.atoms()) next_id = std::max(next_id, a.direction.id + 1);
  if (cfg.param("perturb_angle")) {
    extra = Direction::from_angle(next_id, cfg.number("perturb_angle", 0.0));
  } else {
    std::vector<double> v = first.atom(0).direction.embedding;
    for (double& x : v) x = -x;
    extra = Direction::from_vector(next_id, v);
  }
  if (extra.embedding.size() != first.dimension())
    throw DomainError("perturbing direction has the wrong dimension");

  std::vector<SpinningMeasure> seconds;
  std::vector<CouplingPlan> plans;
  std::vector<double> wass;
  for (double e : eps) {
    std::vector<Atom> atoms;
    for (const Atom& a : first.atoms()) atoms.push_back({a.direction, (1.0 - e) * a.weight});
    atoms.push_back({extra, e});
    seconds.emplace_back(std::move(atoms));
    plans.push_back(build_coupling_plan(first, seconds.back(), PlanKind::optimal, p));
    wass.push_back(wasserstein_p(first, seconds.back(), p));
  }
  const auto sups = coupling_sup_distances(first, seconds, plans, cfg.sim, opt.execution);
  std::vector<Estimate> cost;
  for (const auto& s : sups) cost.push_back(coupling_cost(s, q));
  const HolderReport h = holder_bound_check(p, q, rho, cfg.sim.horizon, eps, wass, cost,
                                            cfg.number("min_slope", 0.3));

  std::ostringstream out;
  csv::Writer w(out, {"eps", "wasserstein_p", "cost", "cost_se", "bound"});
  for (std::size_t k = 0; k < h.eps.size(); ++k) {
    w.field(h.eps[k]).field(h.wasserstein[k]).field(h.cost[k].value).field(h.cost[k].se);
    w.field(h.fitted_c * std::pow(h.wasserstein[k], rho));
    w.end_row();
  }
  Report r{"coupling-holder", {{"holder.csv", out.str()}}, {}};
  r.summary.estimate = h.loglog.slope;
  r.summary.se = h.loglog.slope_se;
  r.summary.window = std::pair{*std::min_element(eps.begin(), eps.end()), *std::max_element(eps.begin(), eps.end())};
  r.summary.verdict = h.pass ? "pass" : "fail";
  auto& d = r.summary.details;
  d["quantity"] = "log-log slope of coupling cost against W_p";
  d["p"] = p;
  d["q"] = q;
  d["rho"] = rho;
  d["c1"] = h.constants.c1;
  d["fitted_c"] = h.fitted_c;
  d["monotone"] = h.monotone;
  d["bound_holds"] = h.bound_holds;
  d["min_slope"] = cfg.number("min_slope", 0.3);
  return r;
}

Report run_lyapunov(const ExperimentConfig& cfg) {
  LyapunovGrid grid = LyapunovGrid::defaults();
  if (cfg.param("lambda_min") || cfg.param("lambda_max") || cfg.param("lambda_points")) {
    const double lo = std::log(cfg.number("lambda_min", 1e-3)), hi = std::log(cfg.number("lambda_max", 50.0));
    const std::size_t m = std::max<std::size_t>(2, cfg.count("lambda_points", 200));
    grid.lambdas.clear();
    for (std::size_t i = 0; i < m; ++i)
      grid.lambdas.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1)));
  }
  if (cfg.param("x_max") || cfg.param("x_points")) {
    const double xmax = cfg.number("x_max", 50.0);
    const std::size_t m = cfg.count("x_points", 400);
    grid.xs.clear();
    for (std::size_t i = 1; i <= m; ++i) grid.xs.push_back(xmax * static_cast<double>(i) / static_cast<double>(m));
  }
  const LyapunovReport rep = lyapunov_for_field(cfg.field(), grid);

  std::ostringstream out;
  csv::Writer w(out, {"x", "K"});
  for (std::size_t i = 0; i < rep.xs.size(); ++i) {
    w.field(rep.xs[i]).field(rep.K_curve[i]);
    w.end_row();
  }
  Report r{"lyapunov", {{"lyapunov.csv", out.str()}}, {}};
  r.summary.estimate = rep.k;
  r.summary.window = std::pair{grid.lambdas.front(), grid.lambdas.back()};
  r.summary.verdict = rep.certified ? "pass" : "fail";
  auto& d = r.summary.details;
  d["quantity"] = "exponential rate k at the optimal lambda";
  d["lambda_star"] = rep.lambda_star;
  d["mode"] = to_string(rep.mode);
  if (rep.closed_form) {
    d["closed_form"] = {{"lambda", rep.closed_form->lambda}, {"k", rep.closed_form->k}};
  }
  return r;
}

Report run_partition(const ExperimentConfig& cfg, const RunOptions& opt) {
  const SpinningMeasure mu = cfg.measure();
  std::vector<std::vector<bool>> subsets;
  std::vector<std::string> labels;
  if (const toml::Value* s = cfg.param("subsets")) {
    for (const toml::Value& subset : s->array) {
      std::vector<bool> member(mu.size(), false);
      std::string label;
      for (const toml::Value& id : subset.array) {
        member[mu.index_of(static_cast<int>(id.integer))] = true;
        label += (label.empty() ? "" : " ") + std::to_string(id.integer);
      }
      subsets.push_back(std::move(member));
      labels.push_back(label);
    }
  } else {
    for (std::size_t i = 0; i < mu.size(); ++i) {
      std::vector<bool> member(mu.size(), false);
      member[i] = true;
      subsets.push_back(std::move(member));
      labels.push_back(std::to_string(mu.atom(i).direction.id));
    }
  }
  const LocalTimeTotals lt = local_times(cfg.field(), mu, start_of(cfg), subsets, cfg.sim, opt.execution);
  const auto results = partition_of_local_time_check(lt.total, lt.split, mu, subsets, cfg.number("tolerance", 0.03));

  std::ostringstream out;
  csv::Writer w(out, {"subset", "mass", "ratio", "se", "ci_low", "ci_high", "status"});
  double worst = 0.0, worst_se = 0.0;
  bool any_fail = false, any_inconclusive = false;
  for (std::size_t a = 0; a < results.size(); ++a) {
    const PartitionResult& p = results[a];
    w.field(labels[a]).field(p.mass).field(p.ratio).field(p.se).field(p.ci_low).field(p.ci_high);
    w.field(to_string(p.status));
    w.end_row();
    if (std::abs(p.ratio - p.mass) >= worst) {
      worst = std::abs(p.ratio - p.mass);
      worst_se = p.se;
    }
    any_fail |= p.status == CheckStatus::fail;
    any_inconclusive |= p.status == CheckStatus::inconclusive;
  }
  Report r{"partition-check", {{"partition.csv", out.str()}}, {}};
  r.summary.estimate = worst;
  r.summary.se = worst_se;
  r.summary.window = std::pair{0.0, cfg.sim.horizon};
  r.summary.verdict = any_fail ? "fail" : any_inconclusive ? "inconclusive" : "pass";
  r.summary.details["quantity"] = "max abs deviation of local-time ratio from mu(A)";
  r.summary.details["tolerance"] = cfg.number("tolerance", 0.03);
  r.summary.details["epsilon"] = cfg.sim.local_time_epsilon;
  r.summary.details["paths"] = cfg.sim.path_count;
  return r;
}

Report run_generator(const ExperimentConfig& cfg) {
  const SpinningMeasure mu = cfg.measure();
  const TestFunction f = test_function(*cfg.param("function"), cfg.rays.size());
  const std::vector<double> hs = cfg.numbers("steps", {0.1, 0.05, 0.025, 0.0125});
  const GeneratorReport g = generator_consistency_check(cfg.field(), mu, f, start_of(cfg), hs,
                                                        cfg.sim.path_count, cfg.sim.seed,
                                                        cfg.count("substeps", 20));
  std::ostringstream out;
  csv::Writer w(out, {"h", "estimate", "se", "difference", "allowance"});
  for (const GeneratorPoint& p : g.points) {
    w.field(p.h).field(p.estimate).field(p.se).field(p.difference);
    w.field(std::abs(g.fitted_c) * std::pow(p.h, g.order) + 3.0 * p.se);
    w.end_row();
  }
  Report r{"generator-check", {{"generator.csv", out.str()}}, {}};
  r.summary.estimate = g.generator;
  if (!g.points.empty()) {
    const auto smallest = std::min_element(g.points.begin(), g.points.end(),
                                           [](const auto& a, const auto& b) { return a.h < b.h; });
    r.summary.se = smallest->se;
  }
  r.summary.window = std::pair{*std::min_element(hs.begin(), hs.end()), *std::max_element(hs.begin(), hs.end())};
  r.summary.verdict = verdict_of(g.status);
  r.summary.details["quantity"] = "generator value Lf(x)";
  r.summary.details["order"] = g.order;
  r.summary.details["fitted_c"] = g.fitted_c;
  return r;
}

Report run_excursion_poisson(const ExperimentConfig& cfg, const RunOptions& opt) {
  const double ell = cfg.number("ell", 2.0), delta = cfg.number("delta", 0.5);
  const double p_min = cfg.number("p_min", 0.01);
  const double mean = ell / delta;
  const auto counts = high_excursion_counts(ell, delta, cfg.sim.dt, cfg.sim.seed, cfg.sim.path_count, opt.execution);
  std::vector<double> xs(counts.begin(), counts.end());
  const Estimate m = mean_estimate(xs);
  const ChiSquare chi = poisson_chi_square(counts, mean);

  const std::size_t top = *std::max_element(counts.begin(), counts.end());
  std::vector<double> freq(top + 1, 0.0);
  for (std::size_t c : counts) freq[c] += 1.0;
  std::ostringstream out;
  csv::Writer w(out, {"count", "observed", "expected"});
  double pmf = std::exp(-mean);
  for (std::size_t k = 0; k <= top; ++k) {
    w.field(k).field(freq[k] / static_cast<double>(counts.size())).field(pmf);
    w.end_row();
    pmf *= mean / static_cast<double>(k + 1);
  }
  Report r{"excursion-poisson", {{"excursions.csv", out.str()}}, {}};
  r.summary.estimate = m.value;
  r.summary.se = m.se;
  r.summary.window = std::pair{0.0, ell};
  const bool mean_ok = std::abs(m.value - mean) <= 3.0 * m.se;
  r.summary.verdict = mean_ok && chi.p_value > p_min ? "pass" : "fail";
  auto& d = r.summary.details;
  d["quantity"] = "mean number of delta-high excursions before local time ell";
  d["expected_mean"] = mean;
  d["chi_square"] = chi.statistic;
  d["dof"] = chi.dof;
  d["p_value"] = chi.p_value;
  d["p_min"] = p_min;
  d["replications"] = counts.size();
  return r;
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  if (cfg.kind == "simulate") return run_simulate(cfg, options);
  if (cfg.kind == "stationary") return run_stationary(cfg);
  if (cfg.kind == "occupation") return run_occupation(cfg, options);
  if (cfg.kind == "tv-decay") return run_tv_decay(cfg, options);
  if (cfg.kind == "coupling-holder") return run_coupling_holder(cfg, options);
  if (cfg.kind == "lyapunov") return run_lyapunov(cfg);
  if (cfg.kind == "partition-check") return run_partition(cfg, options);
  if (cfg.kind == "generator-check") return run_generator(cfg);
  if (cfg.kind == "excursion-poisson") return run_excursion_poisson(cfg, options);
  throw DomainError("unknown experiment kind '" + cfg.kind + "'");
}

int exit_code(const Report& report) {
  const std::string& v = report.summary.verdict;
  return v == "fail" || v == "inconclusive" ? 1 : 0;
}

ordered_json summary_json(const Report& report) {
  const Summary& s = report.summary;
  ordered_json j;
  j["estimate"] = s.estimate ? number_or_null(*s.estimate) : ordered_json();
  j["se"] = s.se ? number_or_null(*s.se) : ordered_json();
  j["window"] = s.window ? ordered_json::array({number_or_null(s.window->first), number_or_null(s.window->second)})
                         : ordered_json();
  j["verdict"] = s.verdict;
  j["kind"] = report.kind;
  j["details"] = s.details;
  return j;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> write_outputs(const Report& report, const ExperimentConfig& cfg,
                                                 const Provenance& provenance,
                                                 const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + directory.string() + ": " + ec.message());
  const auto wants = [&](const char* f) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), f) != cfg.formats.end();
  };
  std::vector<std::filesystem::path> written;
  if (wants("csv"))
    for (const CsvTable& t : report.tables) {
      write_file(directory / t.name, t.text);
      written.push_back(directory / t.name);
    }
  if (wants("json")) {
    write_file(directory / "summary.json", summary_json(report).dump(2) + "\n");
    written.push_back(directory / "summary.json");
  }

  ordered_json m;
  m["tool"] = "walsh-lab";
  m["kind"] = report.kind;
  m["config_digest"] = "sha256:" + sha256_hex(provenance.config_text);
  m["seed"] = cfg.sim.seed;
  m["seed_source"] = provenance.seed_source;
  m["threads"] = provenance.threads;
  m["verdict"] = report.summary.verdict;
  ordered_json files = ordered_json::array();
  for (const auto& p : written) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files.push_back({{"name", p.filename().string()}, {"sha256", sha256_hex(ss.str())}});
  }
  m["files"] = files;
  m["versions"] = {
      {"walsh-lab", kToolVersion},
      {"compiler", __VERSION__},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"boost", BOOST_LIB_VERSION},
      {"openssl", OpenSSL_version(OPENSSL_VERSION)},
  };
  write_file(directory / "manifest.json", m.dump(2) + "\n");
  written.push_back(directory / "manifest.json");
  return written;
}

}  // namespace walsh
