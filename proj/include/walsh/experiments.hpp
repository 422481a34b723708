#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "walsh/config.hpp"
#include "walsh/ensemble.hpp"

namespace walsh {

inline constexpr const char* kToolVersion = "1.0.0";

struct CsvTable {
  std::string name;  // file name, e.g. "decay.csv"
  std::string text;  // header row plus body, CRLF line ends
};

/// Written as summary.json. The first four keys are always present and in
/// this order; `details` carries kind-specific numbers.
struct Summary {
  std::optional<double> estimate;
  std::optional<double> se;
  std::optional<std::pair<double, double>> window;
  std::string verdict = "none";  // none | pass | fail | inconclusive
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

struct Report {
  std::string kind;
  std::vector<CsvTable> tables;
  Summary summary;
};

struct RunOptions {
  std::optional<std::size_t> thin;
  Execution execution = Execution::parallel;
};

Report run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// 0 for verdicts none/pass, 1 for fail/inconclusive.
int exit_code(const Report& report);

nlohmann::ordered_json summary_json(const Report& report);

struct Provenance {
  std::string config_text;  // raw bytes of the config file, hashed into the manifest
  std::string seed_source = "config";
  int threads = 1;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Writes the CSV tables and summary.json (per cfg.formats) plus
/// manifest.json into `directory`; returns the files written.
std::vector<std::filesystem::path> write_outputs(const Report& report, const ExperimentConfig& cfg,
                                                 const Provenance& provenance,
                                                 const std::filesystem::path& directory);

}  // namespace walsh
