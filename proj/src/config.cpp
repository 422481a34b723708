#include "walsh/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "walsh/analysis.hpp"
#include "walsh/error.hpp"

namespace walsh {

using toml::Value;

namespace {

enum class Param { number, positive, count, numbers, point, subsets, function, lambda, string };

struct KindSchema {
  std::string kind;
  std::map<std::string, Param> params;
  bool needs_model = true;
  bool needs_sim = true;
};

const std::vector<KindSchema>& schemas() {
  static const std::vector<KindSchema> all = {
      {"simulate", {{"start", Param::point}, {"thin", Param::count}}},
      {"stationary", {{"r_max", Param::positive}, {"grid_points", Param::count}}, true, false},
      {"occupation",
       {{"start", Param::point},
        {"burn_in", Param::number},
        {"tolerance", Param::positive},
        {"tv_tolerance", Param::positive},
        {"bins", Param::count},
        {"thin", Param::count}}},
      {"tv-decay",
       {{"start", Param::point},
        {"times", Param::numbers},
        {"bins", Param::count},
        {"rate_min", Param::number},
        {"rate_max", Param::number},
        {"weight_lambda", Param::lambda}}},
      {"coupling-holder",
       {{"p", Param::positive},
        {"q", Param::positive},
        {"rho", Param::positive},
        {"r", Param::positive},
        {"eps", Param::numbers},
        {"perturb_angle", Param::number},
        {"min_slope", Param::number}}},
      {"lyapunov",
       {{"lambda_min", Param::positive},
        {"lambda_max", Param::positive},
        {"lambda_points", Param::count},
        {"x_max", Param::positive},
        {"x_points", Param::count}},
       true,
       false},
      {"partition-check",
       {{"start", Param::point}, {"subsets", Param::subsets}, {"tolerance", Param::positive}}},
      {"generator-check",
       {{"start", Param::point},
        {"function", Param::function},
        {"steps", Param::numbers},
        {"substeps", Param::count}}},
      {"excursion-poisson",
       {{"ell", Param::positive},
        {"delta", Param::positive},
        {"p_min", Param::positive},
        {"max_se", Param::positive}},
       false,
       true},
  };
  return all;
}

const KindSchema& schema_of(const std::string& kind) {
  for (const auto& s : schemas())
    if (s.kind == kind) return s;
  throw DomainError("unknown kind");
}

[[noreturn]] void fail(const std::string& what, int line) { throw ConfigError(what, line); }

void reject_unknown(const Value& table, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [k, v] : table.table)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      fail("unknown key '" + k + "' in " + where, v.line);
}

const Value& require_table(const Value& v, const std::string& what) {
  if (v.type != Value::Type::table) fail(what + " must be a table", v.line);
  return v;
}

double as_number(const Value& v, const std::string& key) {
  if (!v.is_number()) fail("'" + key + "' must be a number, got " + type_name(v.type), v.line);
  return v.number();
}

long long as_integer(const Value& v, const std::string& key) {
  if (v.type != Value::Type::integer) fail("'" + key + "' must be an integer", v.line);
  return v.integer;
}

std::string as_string(const Value& v, const std::string& key) {
  if (v.type != Value::Type::string) fail("'" + key + "' must be a string", v.line);
  return v.string;
}

std::vector<double> as_numbers(const Value& v, const std::string& key) {
  if (v.type != Value::Type::array) fail("'" + key + "' must be an array of numbers", v.line);
  std::vector<double> out;
  for (const Value& e : v.array) out.push_back(as_number(e, key));
  return out;
}

RadialCoefficient coefficient(const Value& v, const std::string& key) {
  try {
    if (v.is_number()) return RadialCoefficient::constant(v.number());
    if (v.type != Value::Type::table)
      fail("'" + key + "' must be a number or a coefficient table", v.line);
    const Value* fam = v.find("family");
    if (!fam) fail("'" + key + "' needs a family (constant, affine or tabulated)", v.line);
    const std::string family = as_string(*fam, "family");
    auto get = [&](const char* name) -> const Value& {
      const Value* x = v.find(name);
      if (!x) fail("'" + key + "' (" + family + ") needs '" + name + "'", v.line);
      return *x;
    };
    if (family == "constant") {
      reject_unknown(v, {"family", "c"}, key);
      return RadialCoefficient::constant(as_number(get("c"), "c"));
    }
    if (family == "affine") {
      reject_unknown(v, {"family", "a", "b"}, key);
      return RadialCoefficient::affine(as_number(get("a"), "a"), as_number(get("b"), "b"));
    }
    if (family == "tabulated") {
      reject_unknown(v, {"family", "knots", "values"}, key);
      return RadialCoefficient::tabulated(as_numbers(get("knots"), "knots"),
                                          as_numbers(get("values"), "values"));
    }
    fail("unknown coefficient family '" + family + "'", fam->line);
  } catch (const DomainError& e) {
    fail("'" + key + "': " + e.what(), v.line);
  }
}

Value coefficient_value(const RadialCoefficient& c) {
  Value t;
  t.type = Value::Type::table;
  t.inline_table = true;
  auto num = [](double x) {
    Value v;
    v.type = Value::Type::floating;
    v.floating = x;
    return v;
  };
  auto str = [](std::string s) {
    Value v;
    v.type = Value::Type::string;
    v.string = std::move(s);
    return v;
  };
  auto list = [&](std::span<const double> xs) {
    Value v;
    v.type = Value::Type::array;
    for (double x : xs) v.array.push_back(num(x));
    return v;
  };
  switch (c.family()) {
    case RadialCoefficient::Family::constant:
      t.table = {{"family", str("constant")}, {"c", num(c.a())}};
      break;
    case RadialCoefficient::Family::affine:
      t.table = {{"family", str("affine")}, {"a", num(c.a())}, {"b", num(c.b())}};
      break;
    case RadialCoefficient::Family::tabulated:
      t.table = {{"family", str("tabulated")}, {"knots", list(c.knots())}, {"values", list(c.values())}};
      break;
  }
  return t;
}

void check_param(const Value& v, const std::string& key, Param type) {
  switch (type) {
    case Param::number:
      as_number(v, key);
      break;
    case Param::positive:
      if (!(as_number(v, key) > 0.0)) fail("'" + key + "' must be positive", v.line);
      break;
    case Param::count:
      if (as_integer(v, key) <= 0) fail("'" + key + "' must be a positive integer", v.line);
      break;
    case Param::numbers:
      if (as_numbers(v, key).empty()) fail("'" + key + "' must not be empty", v.line);
      break;
    case Param::point:
      if (v.type == Value::Type::string) {
        if (v.string != "origin") fail("'" + key + "' must be \"origin\" or {ray, radius}", v.line);
      } else if (v.type == Value::Type::table) {
        reject_unknown(v, {"ray", "radius"}, key);
        if (!v.find("ray") || !v.find("radius")) fail("'" + key + "' needs ray and radius", v.line);
        as_integer(*v.find("ray"), "ray");
        if (!(as_number(*v.find("radius"), "radius") >= 0.0))
          fail("'" + key + "' radius must be nonnegative", v.line);
      } else {
        fail("'" + key + "' must be \"origin\" or {ray, radius}", v.line);
      }
      break;
    case Param::subsets:
      if (v.type != Value::Type::array || v.array.empty())
        fail("'" + key + "' must be a nonempty array of ray-id arrays", v.line);
      for (const Value& s : v.array) {
        if (s.type != Value::Type::array) fail("'" + key + "' entries must be arrays of ray ids", s.line);
        for (const Value& id : s.array) as_integer(id, key);
      }
      break;
    case Param::function:
      if (v.type != Value::Type::table) fail("'" + key + "' must be a table", v.line);
      break;
    case Param::lambda:
      if (v.type == Value::Type::string) {
        if (v.string != "lyapunov") fail("'" + key + "' must be a number or \"lyapunov\"", v.line);
      } else if (!(as_number(v, key) > 0.0)) {
        fail("'" + key + "' must be positive", v.line);
      }
      break;
    case Param::string:
      as_string(v, key);
      break;
  }
}

template <class F>
void anchored(int line, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    fail(e.what(), line);
  }
}

void semantic_checks(const ExperimentConfig& cfg, const Value& root) {
  const KindSchema& schema = schema_of(cfg.kind);
  const Value* model = root.find("model");
  const int model_line = model ? model->line : 0;
  const Value* sim = root.find("sim");
  const int sim_line = sim ? sim->line : 0;
  auto sim_key_line = [&](const char* key) {
    const Value* v = sim ? sim->find(key) : nullptr;
    return v ? v->line : sim_line;
  };
  if (schema.needs_model) {
    if (cfg.rays.empty()) fail("kind '" + cfg.kind + "' needs [[model.rays]]", model_line);
    anchored(model_line, [&] { cfg.field().check_compatible(cfg.measure()); });
  }
  if (schema.needs_sim) {
    const SimConfig& c = cfg.sim;
    const char* culprit = !(c.horizon > 0.0) || !std::isfinite(c.horizon) ? "horizon"
                          : !(c.dt > 0.0) || !(c.dt < c.horizon)         ? "dt"
                          : c.path_count == 0                            ? "paths"
                                                                         : nullptr;
    anchored(culprit ? sim_key_line(culprit) : sim_line, [&] { c.validate(); });
  }

  for (const char* key : {"start"})
    if (const Value* p = cfg.param(key)) anchored(p->line, [&] {
        const TreePoint x = cfg.point(*p);
        cfg.field().eval(x);
      });

  if (cfg.kind == "tv-decay") {
    const int line = cfg.line_of("times");
    if (!cfg.param("start")) fail("tv-decay needs a start point", root.find("experiment")->line);
    auto times = cfg.numbers("times", {1, 2, 3, 4, 5, 6});
    if (!std::is_sorted(times.begin(), times.end()) || times.front() <= 0.0)
      fail("'times' must be positive and increasing", line);
    if (times.back() > cfg.sim.horizon + 1e-12) fail("'times' exceed the horizon T", line);
    if (cfg.sim.dt > 1e-2) fail("rate experiments need dt <= 1e-2", sim_key_line("dt"));
    if (cfg.number("rate_min", 0.3) >= cfg.number("rate_max", 0.8))
      fail("'rate_min' must be below 'rate_max'", cfg.line_of("rate_min"));
  }
  if (cfg.kind == "occupation") {
    const double b = cfg.number("burn_in", 0.1);
    if (!(b >= 0.0 && b < 1.0)) fail("'burn_in' must lie in [0, 1)", cfg.line_of("burn_in"));
  }
  if (cfg.kind == "coupling-holder") {
    const double p = cfg.number("p", 2.0), q = cfg.number("q", 1.0);
    const double rho = cfg.param("rho") ? cfg.number("rho", 0.0) : holder_rho(p, cfg.number("r", 1.0));
    const int line = cfg.param("rho") ? cfg.line_of("rho") : cfg.line_of(cfg.param("q") ? "q" : "p");
    anchored(line, [&] { check_holder_admissible(p, q, rho); });
    if (cfg.param("rho") && cfg.param("r")) fail("give either 'rho' or 'r', not both", cfg.line_of("r"));
    for (double e : cfg.numbers("eps", {0.4, 0.2, 0.1, 0.05}))
      if (!(e > 0.0 && e < 1.0)) fail("'eps' entries must lie in (0, 1)", cfg.line_of("eps"));
    if (cfg.numbers("eps", {0.4, 0.2, 0.1, 0.05}).size() < 2)
      fail("'eps' needs at least two entries", cfg.line_of("eps"));
  }
  if (cfg.kind == "lyapunov") {
    if (cfg.number("lambda_min", 1e-3) >= cfg.number("lambda_max", 50.0))
      fail("'lambda_min' must be below 'lambda_max'", cfg.line_of("lambda_min"));
    anchored(model_line, [&] {
      if (!cfg.field().dispersion_angular_independent())
        throw DomainError("explicit rate needs the same dispersion on every ray");
    });
  }
  if (cfg.kind == "partition-check") {
    anchored(sim_key_line("local_time_epsilon"), [&] { cfg.sim.validate_local_time(); });
    if (const Value* s = cfg.param("subsets"))
      for (const Value& subset : s->array)
        for (const Value& id : subset.array)
          anchored(id.line, [&] { cfg.measure().index_of(static_cast<int>(id.integer)); });
  }
  if (cfg.kind == "generator-check") {
    const Value* f = cfg.param("function");
    if (!f) fail("generator-check needs a test function", root.find("experiment")->line);
    anchored(f->line, [&] {
      const TestFunction tf = test_function(*f, cfg.rays.size());
      const double flux = origin_flux(cfg.measure(), tf);
      if (std::abs(flux) > 1e-8)
        throw DomainError("test function is outside the generator domain: weighted flux " +
                          std::to_string(flux) + " at the origin");
    });
    for (double h : cfg.numbers("steps", {0.1, 0.05, 0.025, 0.0125}))
      if (!(h > 0.0)) fail("'steps' must be positive", cfg.line_of("steps"));
    if (cfg.numbers("steps", {0.1, 0.05, 0.025, 0.0125}).size() < 2)
      fail("'steps' needs at least two entries", cfg.line_of("steps"));
  }
  if (cfg.kind == "excursion-poisson" && cfg.number("p_min", 0.01) >= 1.0)
    fail("'p_min' must be below 1", cfg.line_of("p_min"));
}

Value make_number(double x) {
  Value v;
  v.type = Value::Type::floating;
  v.floating = x;
  return v;
}

Value make_integer(long long x) {
  Value v;
  v.type = Value::Type::integer;
  v.integer = x;
  return v;
}

Value make_string(std::string s) {
  Value v;
  v.type = Value::Type::string;
  v.string = std::move(s);
  return v;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& s : schemas()) k.push_back(s.kind);
    return k;
  }();
  return kinds;
}

SpinningMeasure ExperimentConfig::measure() const {
  std::vector<Atom> atoms;
  const double n = static_cast<double>(rays.size());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const RayConfig& r = rays[i];
    Direction d = !r.vector.empty() ? Direction::from_vector(r.id, r.vector)
                                    : Direction::from_angle(
                                          r.id, r.angle.value_or(2.0 * std::numbers::pi *
                                                                 static_cast<double>(i) / n));
    atoms.push_back({std::move(d), r.weight});
  }
  return SpinningMeasure(std::move(atoms));
}

CoefficientField ExperimentConfig::field() const {
  std::vector<RayCoefficients> rc;
  for (const RayConfig& r : rays) rc.push_back({r.drift, r.dispersion, r.domain_radius});
  return CoefficientField(std::move(rc));
}

TreePoint ExperimentConfig::point(const Value& spec) const {
  if (spec.type == Value::Type::string) return TreePoint::origin();
  const int id = static_cast<int>(spec.find("ray")->integer);
  const double radius = spec.find("radius")->number();
  for (std::size_t i = 0; i < rays.size(); ++i)
    if (rays[i].id == id) return TreePoint::on_ray(static_cast<int>(i), radius);
  throw DomainError("point refers to unknown ray id " + std::to_string(id));
}

double ExperimentConfig::number(std::string_view key, double fallback) const {
  const Value* v = params.find(key);
  return v ? v->number() : fallback;
}

std::size_t ExperimentConfig::count(std::string_view key, std::size_t fallback) const {
  const Value* v = params.find(key);
  return v ? static_cast<std::size_t>(v->integer) : fallback;
}

std::vector<double> ExperimentConfig::numbers(std::string_view key, std::vector<double> fallback) const {
  const Value* v = params.find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const Value& e : v->array) out.push_back(e.number());
  return out;
}

int ExperimentConfig::line_of(std::string_view key) const {
  const Value* v = params.find(key);
  return v ? v->line : params.line;
}

TestFunction test_function(const Value& spec, std::size_t rays) {
  const Value* kind = spec.find("kind");
  if (!kind || kind->type != Value::Type::string)
    throw DomainError("test function needs kind = \"power\" | \"constant\" | \"ray_linear\"");
  if (kind->string == "power") {
    reject_unknown(spec, {"kind", "k"}, "function");
    const Value* k = spec.find("k");
    return TestFunction::power(k ? as_number(*k, "k") : 2.0);
  }
  if (kind->string == "constant") {
    reject_unknown(spec, {"kind", "c"}, "function");
    const Value* c = spec.find("c");
    return TestFunction::constant(c ? as_number(*c, "c") : 1.0);
  }
  if (kind->string == "ray_linear") {
    reject_unknown(spec, {"kind", "slopes"}, "function");
    const Value* s = spec.find("slopes");
    if (!s) throw DomainError("ray_linear needs slopes");
    auto slopes = as_numbers(*s, "slopes");
    if (slopes.size() != rays) throw DomainError("ray_linear needs one slope per ray");
    return TestFunction::ray_linear(std::move(slopes));
  }
  throw DomainError("unknown test function kind '" + kind->string + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  const Value root = toml::parse(text);
  reject_unknown(root, {"model", "sim", "experiment", "output"}, "the top level");
  ExperimentConfig cfg;

  const Value* exp = root.find("experiment");
  if (!exp) fail("missing [experiment] table", 0);
  require_table(*exp, "experiment");
  const Value* kind = exp->find("kind");
  if (!kind) fail("[experiment] needs 'kind'", exp->line);
  cfg.kind = as_string(*kind, "kind");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
    fail("unknown experiment kind '" + cfg.kind + "'", kind->line);
  const KindSchema& schema = schema_of(cfg.kind);
  cfg.params.type = Value::Type::table;
  cfg.params.line = exp->line;
  for (const auto& [k, v] : exp->table) {
    if (k == "kind") continue;
    const auto it = schema.params.find(k);
    if (it == schema.params.end()) fail("unknown key '" + k + "' for kind '" + cfg.kind + "'", v.line);
    check_param(v, k, it->second);
    cfg.params.table.emplace_back(k, v);
  }

  if (const Value* model = root.find("model")) {
    require_table(*model, "model");
    reject_unknown(*model, {"rays"}, "[model]");
    const Value* rays = model->find("rays");
    if (!rays || rays->type != Value::Type::array || rays->array.empty())
      fail("[model] needs at least one [[model.rays]] entry", model->line);
    for (std::size_t i = 0; i < rays->array.size(); ++i) {
      const Value& r = require_table(rays->array[i], "model.rays entry");
      reject_unknown(r, {"id", "angle", "vector", "weight", "drift", "dispersion", "domain_radius"},
                     "[[model.rays]]");
      RayConfig rc;
      rc.id = static_cast<int>(i);
      if (const Value* v = r.find("id")) rc.id = static_cast<int>(as_integer(*v, "id"));
      if (const Value* v = r.find("angle")) rc.angle = as_number(*v, "angle");
      if (const Value* v = r.find("vector")) rc.vector = as_numbers(*v, "vector");
      const Value* w = r.find("weight");
      if (!w) fail("ray " + std::to_string(rc.id) + " needs a weight", r.line);
      rc.weight = as_number(*w, "weight");
      if (!(rc.weight > 0.0)) fail("ray weights must be positive", w->line);
      if (const Value* v = r.find("drift")) rc.drift = coefficient(*v, "drift");
      if (const Value* v = r.find("dispersion")) rc.dispersion = coefficient(*v, "dispersion");
      if (const Value* v = r.find("domain_radius")) {
        rc.domain_radius = as_number(*v, "domain_radius");
        if (!(rc.domain_radius > 0.0)) fail("'domain_radius' must be positive", v->line);
      }
      const int line = r.line;
      anchored(line, [&] {
        if (!rc.dispersion.positive_on(rc.domain_radius))
          throw DomainError("dispersion of ray " + std::to_string(rc.id) +
                            " must stay bounded away from 0");
        if (!rc.vector.empty()) Direction::from_vector(rc.id, rc.vector);
      });
      cfg.rays.push_back(std::move(rc));
    }
    anchored(model->line, [&] { cfg.measure(); });
  } else if (schema.needs_model) {
    fail("missing [model] table", 0);
  }

  if (const Value* sim = root.find("sim")) {
    require_table(*sim, "sim");
    reject_unknown(*sim, {"horizon", "dt", "seed", "paths", "local_time_epsilon"}, "[sim]");
    if (const Value* v = sim->find("horizon")) cfg.sim.horizon = as_number(*v, "horizon");
    if (const Value* v = sim->find("dt")) cfg.sim.dt = as_number(*v, "dt");
    if (const Value* v = sim->find("seed")) {
      const long long s = as_integer(*v, "seed");
      if (s < 0) fail("'seed' must be nonnegative", v->line);
      cfg.sim.seed = static_cast<std::uint64_t>(s);
    }
    if (const Value* v = sim->find("paths")) {
      const long long n = as_integer(*v, "paths");
      if (n <= 0) fail("'paths' must be positive", v->line);
      cfg.sim.path_count = static_cast<std::size_t>(n);
    }
    if (const Value* v = sim->find("local_time_epsilon"))
      cfg.sim.local_time_epsilon = as_number(*v, "local_time_epsilon");
    for (const char* key : {"horizon", "dt", "seed"})
      if (schema.needs_sim && !sim->find(key)) fail("[sim] needs '" + std::string(key) + "'", sim->line);
  } else if (schema.needs_sim) {
    fail("missing [sim] table", 0);
  }

  if (const Value* out = root.find("output")) {
    require_table(*out, "output");
    reject_unknown(*out, {"directory", "formats"}, "[output]");
    if (const Value* v = out->find("directory")) cfg.output_directory = as_string(*v, "directory");
    if (const Value* v = out->find("formats")) {
      if (v->type != Value::Type::array) fail("'formats' must be an array of strings", v->line);
      cfg.formats.clear();
      for (const Value& f : v->array) {
        const std::string s = as_string(f, "formats");
        if (s != "csv" && s != "json") fail("unknown output format '" + s + "'", f.line);
        cfg.formats.push_back(s);
      }
    }
  }

  semantic_checks(cfg, root);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  Value root;
  if (!cfg.rays.empty()) {
    Value model;
    Value rays;
    rays.type = Value::Type::array;
    for (const RayConfig& r : cfg.rays) {
      Value t;
      t.table.emplace_back("id", make_integer(r.id));
      if (r.angle) t.table.emplace_back("angle", make_number(*r.angle));
      if (!r.vector.empty()) {
        Value v;
        v.type = Value::Type::array;
        for (double x : r.vector) v.array.push_back(make_number(x));
        t.table.emplace_back("vector", std::move(v));
      }
      t.table.emplace_back("weight", make_number(r.weight));
      t.table.emplace_back("drift", coefficient_value(r.drift));
      t.table.emplace_back("dispersion", coefficient_value(r.dispersion));
      if (std::isfinite(r.domain_radius)) t.table.emplace_back("domain_radius", make_number(r.domain_radius));
      rays.array.push_back(std::move(t));
    }
    model.table.emplace_back("rays", std::move(rays));
    root.table.emplace_back("model", std::move(model));
  }
  Value sim;
  sim.table = {{"horizon", make_number(cfg.sim.horizon)},
               {"dt", make_number(cfg.sim.dt)},
               {"seed", make_integer(static_cast<long long>(cfg.sim.seed))},
               {"paths", make_integer(static_cast<long long>(cfg.sim.path_count))},
               {"local_time_epsilon", make_number(cfg.sim.local_time_epsilon)}};
  root.table.emplace_back("sim", std::move(sim));
  Value exp;
  exp.table.emplace_back("kind", make_string(cfg.kind));
  for (const auto& [k, v] : cfg.params.table) exp.table.emplace_back(k, v);
  root.table.emplace_back("experiment", std::move(exp));
  Value out;
  out.table.emplace_back("directory", make_string(cfg.output_directory));
  Value formats;
  formats.type = Value::Type::array;
  for (const auto& f : cfg.formats) formats.array.push_back(make_string(f));
  out.table.emplace_back("formats", std::move(formats));
  root.table.emplace_back("output", std::move(out));
  return toml::serialize(root);
}

}  // namespace walsh
