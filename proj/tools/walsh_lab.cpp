#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "walsh/config.hpp"
#include "walsh/error.hpp"
#include "walsh/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerdictFailed = 1;
constexpr int kBadConfig = 2;
constexpr int kRuntimeError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw walsh::ConfigError("cannot read config file " + path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Loaded {
  walsh::ExperimentConfig cfg;
  std::string text;
  std::string seed_source = "config";
};

Loaded load(const std::string& path) {
  Loaded l;
  l.text = read_file(path);
  l.cfg = walsh::parse_config(l.text);
  if (const char* env = std::getenv("WALSH_LAB_SEED")) {
    const std::string s(env);
    std::size_t used = 0;
    unsigned long long seed = 0;
    try {
      if (s.empty() || s.front() == '-') throw std::invalid_argument("sign");
      seed = std::stoull(s, &used, 10);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw walsh::ConfigError("WALSH_LAB_SEED must be a nonnegative integer, got '" + s + "'", 0);
    l.cfg.sim.seed = seed;
    l.seed_source = "WALSH_LAB_SEED";
  }
  return l;
}

void report_config_error(const std::string& path, const walsh::ConfigError& e) {
  std::cerr << path;
  if (e.line() > 0) std::cerr << ':' << e.line();
  const std::string msg = e.what();
  const std::string prefix = "line " + std::to_string(e.line()) + ": ";
  std::cerr << ": error: " << (e.line() > 0 && msg.rfind(prefix, 0) == 0 ? msg.substr(prefix.size()) : msg)
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Walsh diffusion experiments on spiders"};
  app.require_subcommand(1);
  app.set_version_flag("--version", walsh::kToolVersion);

  int threads = 0;
  std::optional<std::size_t> thin;
  std::string config_path;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "experiment config (TOML)")->required();
  run->add_option("--threads", threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--thin", thin, "keep every N-th grid node in exported paths")->check(CLI::PositiveNumber);
  run->add_option("-o,--out", out_dir, "output directory (overrides the config)");

  auto* validate = app.add_subcommand("validate", "check a config file without running it");
  validate->add_option("config", config_path, "experiment config (TOML)")->required();

  auto* kinds = app.add_subcommand("list-kinds", "print the supported experiment kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kBadConfig;
  }

  if (kinds->parsed()) {
    for (const auto& k : walsh::experiment_kinds()) std::cout << k << '\n';
    return kOk;
  }

  Loaded loaded;
  try {
    loaded = load(config_path);
  } catch (const walsh::ConfigError& e) {
    report_config_error(config_path, e);
    return kBadConfig;
  }

  if (validate->parsed()) {
    std::cout << config_path << ": ok (" << loaded.cfg.kind << ")\n";
    return kOk;
  }

  try {
    walsh::set_thread_count(threads);
    walsh::RunOptions opt;
    opt.thin = thin;
    const walsh::Report report = walsh::run_experiment(loaded.cfg, opt);
    walsh::Provenance prov{loaded.text, loaded.seed_source, walsh::thread_count()};
    const std::filesystem::path dir = out_dir.empty() ? loaded.cfg.output_directory : out_dir;
    for (const auto& f : walsh::write_outputs(report, loaded.cfg, prov, dir)) std::cout << f.string() << '\n';
    std::cout << "verdict: " << report.summary.verdict << '\n';
    return walsh::exit_code(report) == 0 ? kOk : kVerdictFailed;
  } catch (const walsh::ConfigError& e) {
    report_config_error(config_path, e);
    return kBadConfig;
  } catch (const walsh::DomainError& e) {
    std::cerr << config_path << ": error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "walsh-lab: " << e.what() << '\n';
    return kRuntimeError;
  }
}
