#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "walsh/config.hpp"
#include "walsh/error.hpp"
#include "walsh/toml.hpp"

using namespace walsh;

namespace {

const char* kBase = R"(# minimal
[model]
[[model.rays]]
id = 0
weight = 0.4
drift = -1.0
[[model.rays]]
id = 1
weight = 0.6
drift = { family = "affine", a = -0.5, b = -0.25 }

[sim]
horizon = 2.0
dt = 1e-3
seed = 3

[experiment]
kind = "simulate"
start = { ray = 1, radius = 0.5 }
)";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("toml subset") {
  const toml::Value v = toml::parse(R"(a = 1
b = 2.5
c = "x\"y"
d = 'lit\n'
e = [1, 2,
     3]
f = { g = true, h = -inf }
[t.u]
k = 1e-3
[[arr]]
x = 1
[[arr]]
x = 2
)");
  CHECK(v.find("a")->integer == 1);
  CHECK(v.find("b")->floating == 2.5);
  CHECK(v.find("c")->string == "x\"y");
  CHECK(v.find("d")->string == "lit\\n");
  CHECK(v.find("e")->array.size() == 3);
  CHECK(v.find("e")->line == 5);
  CHECK(v.find("f")->find("g")->boolean);
  CHECK(std::isinf(v.find("f")->find("h")->floating));
  CHECK(v.find("t")->find("u")->find("k")->number() == 1e-3);
  CHECK(v.find("t")->find("u")->find("k")->line == 9);
  CHECK(v.find("arr")->array.size() == 2);
  CHECK(v.find("arr")->array[1].find("x")->integer == 2);

  CHECK(toml::parse(toml::serialize(v)) == v);

  auto line = [](const char* text) {
    try {
      toml::parse(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line("a = 1\nb = \n") == 2);
  CHECK(line("a = 1\na = 2\n") == 2);
  CHECK(line("a = 1\n\n[t\n") == 3);
  CHECK(line("s = \"open\n") == 1);
}

TEST_CASE("every shipped config parses and validates") {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(WALSH_CONFIG_DIR)) {
    if (entry.path().extension() != ".toml") continue;
    ++seen;
    CAPTURE(entry.path().string());
    ExperimentConfig cfg;
    REQUIRE_NOTHROW(cfg = load_config(entry.path()));
    // Canonical text round-trips and is a fixed point.
    const std::string text = serialize_config(cfg);
    const ExperimentConfig again = parse_config(text);
    CHECK(again == cfg);
    CHECK(serialize_config(again) == text);
  }
  CHECK(seen >= 9);
}

TEST_CASE("every experiment kind is covered by a shipped config") {
  std::set<std::string> kinds;
  for (const auto& entry : std::filesystem::directory_iterator(WALSH_CONFIG_DIR))
    if (entry.path().extension() == ".toml") kinds.insert(load_config(entry.path()).kind);
  for (const auto& k : experiment_kinds()) CHECK_MESSAGE(kinds.count(k) == 1, k);
  CHECK(experiment_kinds().size() == 9);
}

TEST_CASE("base config fields") {
  const ExperimentConfig cfg = parse_config(kBase);
  CHECK(cfg.kind == "simulate");
  CHECK(cfg.rays.size() == 2);
  CHECK(cfg.sim.seed == 3);
  CHECK(cfg.sim.path_count == 1);
  CHECK(cfg.output_directory == "out");
  CHECK(cfg.measure().weight(1) == 0.6);
  CHECK(cfg.field().drift(1, 2.0) == doctest::Approx(-1.0));
  const TreePoint x = cfg.point(*cfg.param("start"));
  CHECK(x.ray == 1);
  CHECK(x.radius == 0.5);
  CHECK(cfg.line_of("start") == 19);
}

TEST_CASE("invalid configs are rejected with the offending line") {
  const std::string base = kBase;
  CHECK(error_line(replace(base, "drift = -1.0", "drift = -1.0\nbogus = 1")) == 7);
  CHECK(error_message(replace(base, "drift = -1.0", "drift = -1.0\nbogus = 1")).find("bogus") != std::string::npos);
  CHECK(error_line(replace(base, "weight = 0.6", "weight = 0.5")) > 0);
  CHECK(error_line(replace(base, "weight = 0.4", "weight = -0.4")) == 5);
  CHECK(error_line(replace(base, "dt = 1e-3", "dt = 0.0")) == 14);
  CHECK(error_line(replace(base, "kind = \"simulate\"", "kind = \"nope\"")) == 18);
  CHECK(error_line(replace(base, "radius = 0.5", "radius = -0.5")) == 19);
  CHECK(error_line(replace(base, "ray = 1,", "ray = 7,")) == 19);
  CHECK(error_line(replace(base, "[sim]", "[simulation]")) == 12);
  CHECK(error_line(replace(base, "seed = 3", "seed = -3")) == 15);
  CHECK(error_line(base + "thin = 0\n") == 20);
  CHECK(error_line(base + "colour = 1\n") == 20);
  CHECK_THROWS_AS(parse_config(replace(base, "seed = 3\n", "")), ConfigError);

  const std::string gen = replace(base, "kind = \"simulate\"\nstart = { ray = 1, radius = 0.5 }",
                                  "kind = \"generator-check\"\nstart = \"origin\"\nfunction = { kind = \"power\", k = 1.0 }");
  CHECK(error_message(gen).find("outside the generator domain") != std::string::npos);
  CHECK(error_line(gen) == 20);

  const std::string holder = replace(base, "kind = \"simulate\"\nstart = { ray = 1, radius = 0.5 }",
                                     "kind = \"coupling-holder\"\np = 2.0\nq = 2.0\nrho = 0.4\neps = [0.2, 0.1]");
  CHECK(error_line(holder) > 0);

  const std::string tv = replace(base, "kind = \"simulate\"", "kind = \"tv-decay\"\ntimes = [1.0, 0.5, 1.5, 2.0]");
  CHECK(error_line(tv) == 19);
}

TEST_CASE("test function specs") {
  const toml::Value spec = toml::parse("f = { kind = \"ray_linear\", slopes = [0.6, -0.4] }\n");
  const TestFunction f = test_function(*spec.find("f"), 2);
  CHECK(f.value(1, 2.0) == doctest::Approx(-0.8));
  CHECK_THROWS(test_function(*spec.find("f"), 3));
}
