#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "walsh/geometry.hpp"
#include "walsh/model.hpp"
#include "walsh/simulate.hpp"
#include "walsh/toml.hpp"

namespace walsh {

struct RayConfig {
  int id = 0;
  std::optional<double> angle;  // planar placement; default 2 pi i / n
  std::vector<double> vector;   // explicit embedding, overrides angle
  double weight = 0.0;
  RadialCoefficient drift = RadialCoefficient::constant(0.0);
  RadialCoefficient dispersion = RadialCoefficient::constant(1.0);
  double domain_radius = kInfinity;

  friend bool operator==(const RayConfig&, const RayConfig&) = default;
};

/// One experiment: model, simulation settings, kind-specific parameters
/// (validated against the kind's schema) and output settings.
struct ExperimentConfig {
  std::vector<RayConfig> rays;
  SimConfig sim;
  std::string kind;
  toml::Value params;  // the [experiment] table without `kind`
  std::string output_directory = "out";
  std::vector<std::string> formats{"csv", "json"};

  SpinningMeasure measure() const;
  CoefficientField field() const;
  /// Point from an inline table {ray = <atom id>, radius = r} or the string "origin".
  TreePoint point(const toml::Value& spec) const;

  double number(std::string_view key, double fallback) const;
  std::size_t count(std::string_view key, std::size_t fallback) const;
  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) const;
  const toml::Value* param(std::string_view key) const { return params.find(key); }
  int line_of(std::string_view key) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

const std::vector<std::string>& experiment_kinds();

/// Parses and validates a config; every problem is a ConfigError naming the line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical TOML text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Test function described by an inline table:
/// {kind = "power", k = 2} | {kind = "constant", c = 1} | {kind = "ray_linear", slopes = [..]}.
TestFunction test_function(const toml::Value& spec, std::size_t rays);

}  // namespace walsh
