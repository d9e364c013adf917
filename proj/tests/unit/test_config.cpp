#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "shearstab/config.hpp"

using namespace shearstab;

TEST_CASE("full configuration parses") {
  const ExperimentConfig c = parse_config(R"(
experiment = "resolvent-scan"
threads = 2
output_dir = "results"

[profile]
kind = "quartic"
coefficients = [0.25]

[grid]
n = [128, 256]

[sweep]
nu = [1e-3, 1e-4]
alpha = [1, 2]
lambda = { min = 0.1, max = 0.9, points = 9 }
bc = ["non-slip", "navier-slip"]
pairs = ["L2->L2_w"]

[scan]
points = 51
)");
  CHECK(c.kind == ExperimentKind::resolvent_scan);
  CHECK(c.threads == 2);
  CHECK(c.output_dir == "results");
  CHECK(c.profile == ProfileKind::quartic);
  CHECK(c.profile_coefficients == std::vector<double>{0.25});
  CHECK(c.grids == std::vector<int>{128, 256});
  CHECK(c.nus.size() == 2);
  CHECK(c.alphas == std::vector<int>{1, 2});
  REQUIRE(c.lambdas.size() == 9);
  CHECK(c.lambdas.front() == doctest::Approx(0.1));
  CHECK(c.lambdas.back() == doctest::Approx(0.9));
  CHECK(c.bcs.size() == 2);
  CHECK(c.pairs == std::vector<NormPair>{NormPair::L2_L2w});
  CHECK(c.scan_points == 51);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("kind names accept both spellings") {
  for (ExperimentKind k : all_experiment_kinds()) CHECK(parse_experiment_kind(to_string(k)) == k);
  CHECK(parse_experiment_kind("evolve_linear") == ExperimentKind::evolve_linear);
  CHECK_THROWS_AS(parse_experiment_kind("evolve"), ConfigError);
}

TEST_CASE("syntax and schema errors") {
  CHECK_THROWS_AS(parse_config("experiment = "), ConfigError);
  CHECK_THROWS_AS(parse_config("colour = 3"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nmu = [1e-3]"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nnu = \"small\""), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = 1\nseeds = [2]"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nbc = [\"periodic\"]"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), ConfigError);
}

TEST_CASE("validation") {
  ExperimentConfig c;
  c.kind = ExperimentKind::airy_table;
  CHECK_NOTHROW(validate(c));

  c.nus = {0.5};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.nus = {1e-3};

  c.kind = ExperimentKind::evolve_linear;
  CHECK_THROWS_AS(validate(c), ConfigError);   // seeded experiment without a seed
  c.seeds = {1};
  CHECK_NOTHROW(validate(c));

  c.profile = ProfileKind::custom_coefficients;
  c.profile_coefficients = {0.0, 1.0};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.profile = ProfileKind::poiseuille;

  c.modes = 17;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.modes = 8;
  c.criteria = {11};
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("seeded kinds") {
  CHECK_FALSE(uses_seed(ExperimentKind::resolvent_scan));
  CHECK_FALSE(uses_seed(ExperimentKind::airy_table));
  CHECK(uses_seed(ExperimentKind::evolve_nonlinear));
}

TEST_CASE("log spacing") {
  const auto v = log_space(1e-5, 1e-3, 3);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(1e-5));
  CHECK(v[1] == doctest::Approx(1e-4));
  CHECK(v[2] == doctest::Approx(1e-3));
}

TEST_CASE("shipped example configurations are valid") {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SHEARSTAB_CONFIG_DIR)) {
    if (entry.path().extension() != ".toml") continue;
    CAPTURE(entry.path().string());
    const ExperimentConfig c = load_config(entry.path().string());
    CHECK_NOTHROW(validate(c));
    std::string stem = entry.path().stem().string();
    std::replace(stem.begin(), stem.end(), '_', '-');
    CHECK(to_string(c.kind) == stem);
    ++count;
  }
  CHECK(count == static_cast<int>(all_experiment_kinds().size()));
}
