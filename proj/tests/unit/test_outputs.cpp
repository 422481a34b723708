#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "walsh/config.hpp"
#include "walsh/csv.hpp"
#include "walsh/experiments.hpp"

using namespace walsh;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("walsh_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + WALSH_LAB_BINARY + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSimulate = R"([model]
[[model.rays]]
id = 0
weight = 1.0
drift = -1.0

[sim]
horizon = 0.05
dt = 1e-3
seed = 4

[experiment]
kind = "simulate"
start = { ray = 0, radius = 1.0 }
)";

}  // namespace

TEST_CASE("number formatting and quoting") {
  CHECK(csv::format_double(0.1) == "0.10000000000000001");
  CHECK(csv::format_double(1.0) == "1");
  CHECK(csv::format_double(-2.5e-300) == "-2.5e-300");
  CHECK(std::stod(csv::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(csv::format_double(std::nan("")) == "nan");
  CHECK(csv::quote("plain") == "plain");
  CHECK(csv::quote("a,b") == "\"a,b\"");
  CHECK(csv::quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv::quote("two\nlines") == "\"two\nlines\"");

  std::ostringstream out;
  {
    csv::Writer w(out, {"x", "label"});
    w.field(0.5).field("a,b").end_row();
  }
  CHECK(out.str() == "x,label\r\n0.5,\"a,b\"\r\n");
  std::ostringstream empty;
  csv::Writer header_only(empty, {"t"});
  CHECK(empty.str() == "t\r\n");
}

TEST_CASE("summary key order and exit codes") {
  Report r{"simulate", {}, {}};
  r.summary.verdict = "pass";
  r.summary.details["z"] = 1;
  r.summary.details["a"] = 2;
  const auto j = summary_json(r);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  REQUIRE(keys.size() >= 4);
  CHECK(keys[0] == "estimate");
  CHECK(keys[1] == "se");
  CHECK(keys[2] == "window");
  CHECK(keys[3] == "verdict");
  CHECK(j["estimate"].is_null());
  CHECK(j["details"].begin().key() == "z");
  CHECK(exit_code(r) == 0);
  r.summary.verdict = "none";
  CHECK(exit_code(r) == 0);
  r.summary.verdict = "fail";
  CHECK(exit_code(r) == 1);
  r.summary.verdict = "inconclusive";
  CHECK(exit_code(r) == 1);
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("written outputs and manifest") {
  const fs::path dir = scratch("outputs");
  const ExperimentConfig cfg = parse_config(kSimulate);
  const Report r = run_experiment(cfg);
  const auto files = write_outputs(r, cfg, {kSimulate, "config", 1}, dir);
  CHECK(files.size() == 3);
  const std::string csv_text = slurp(dir / "path.csv");
  CHECK(csv_text.rfind("t,", 0) == 0);
  CHECK(csv_text.find("\r\n") != std::string::npos);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["seed"] == 4);
  CHECK(manifest["config_digest"] == "sha256:" + sha256_hex(kSimulate));
  CHECK(manifest["versions"]["walsh-lab"] == kToolVersion);
  for (const auto& f : manifest["files"])
    CHECK(f["sha256"] == sha256_hex(slurp(dir / f["name"].get<std::string>())));

  ExperimentConfig csv_only = cfg;
  csv_only.formats = {"csv"};
  const fs::path dir2 = scratch("csv_only");
  write_outputs(r, csv_only, {kSimulate, "config", 1}, dir2);
  CHECK_FALSE(fs::exists(dir2 / "summary.json"));
  CHECK(fs::exists(dir2 / "manifest.json"));
}

TEST_CASE("command line exit codes and seed override") {
  const fs::path dir = scratch("cli");
  const fs::path good = dir / "good.toml", bad = dir / "bad.toml", log = dir / "log.txt";
  std::ofstream(good) << kSimulate;
  std::ofstream(bad) << std::string(kSimulate) + "mystery = 1\n";

  CHECK(run_cli("list-kinds", log) == 0);
  CHECK(slurp(log).find("excursion-poisson") != std::string::npos);
  CHECK(run_cli("validate \"" + good.string() + "\"", log) == 0);
  CHECK(run_cli("validate \"" + bad.string() + "\"", log) == 2);
  CHECK(slurp(log).find("bad.toml:15: error:") != std::string::npos);
  CHECK(run_cli("run \"" + (dir / "missing.toml").string() + "\"", log) == 2);
  CHECK(run_cli("frobnicate", log) == 2);

  const fs::path out = dir / "out";
  CHECK(run_cli("run \"" + good.string() + "\" --threads 1 -o \"" + out.string() + "\"", log) == 0);
  CHECK(nlohmann::json::parse(slurp(out / "manifest.json"))["seed_source"] == "config");
  const std::string first = slurp(out / "path.csv");

  CHECK(run_cli("run \"" + good.string() + "\" --thin 10 -o \"" + out.string() + "\"", log) == 0);
  const std::string thinned = slurp(out / "path.csv");
  CHECK(std::count(thinned.begin(), thinned.end(), '\n') < std::count(first.begin(), first.end(), '\n'));

  CHECK(setenv("WALSH_LAB_SEED", "99", 1) == 0);
  CHECK(run_cli("run \"" + good.string() + "\" -o \"" + out.string() + "\"", log) == 0);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(m["seed"] == 99);
  CHECK(m["seed_source"] == "WALSH_LAB_SEED");
  CHECK(slurp(out / "path.csv") != first);
  CHECK(setenv("WALSH_LAB_SEED", "abc", 1) == 0);
  CHECK(run_cli("run \"" + good.string() + "\" -o \"" + out.string() + "\"", log) == 2);
  unsetenv("WALSH_LAB_SEED");
}
