#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "shearstab/experiment.hpp"

using namespace shearstab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shearstab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("airy table writes csv and summary") {
  ExperimentConfig c;
  c.kind = ExperimentKind::airy_table;
  c.airy_radii = {0.0, 1.0};
  c.airy_angles = 4;
  c.output_dir = scratch("airy").string();
  std::ostringstream log;
  const ExperimentOutcome r = run_experiment(c, log);
  REQUIRE(r.exit_code == exit_ok);
  const fs::path dir = r.output_dir;
  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.rfind("z_re,z_im,Ai_re", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 1 + 4);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["rows"] == 5);
  CHECK(fs::exists(dir / "timings.json"));
  fs::remove_all(c.output_dir);
}

TEST_CASE("summary is independent of the thread count") {
  std::string summaries[2];
  for (int k = 0; k < 2; ++k) {
    ExperimentConfig c;
    c.kind = ExperimentKind::coercivity_check;
    c.grids = {48};
    c.alphas = {1};
    c.lambdas = {0.3, 0.6};
    c.samples = 3;
    c.seeds = {7};
    c.threads = k + 1;
    c.output_dir = scratch("threads" + std::to_string(k)).string();
    std::ostringstream log;
    const ExperimentOutcome r = run_experiment(c, log);
    REQUIRE(r.exit_code == exit_ok);
    auto j = nlohmann::json::parse(slurp(fs::path(r.output_dir) / "summary.json"));
    j["config"].erase("threads");
    summaries[k] = j.dump();
    fs::remove_all(c.output_dir);
  }
  CHECK(summaries[0] == summaries[1]);
}

TEST_CASE("errors map to exit codes") {
  ExperimentConfig c;
  c.kind = ExperimentKind::evolve_linear;   // no seed
  c.output_dir = scratch("errors").string();
  std::ostringstream log;
  CHECK(run_experiment(c, log).exit_code == exit_config_error);

  c.kind = ExperimentKind::corrector_check;
  c.seeds = {1};
  c.nus = {1e-2};                           // layer too thick for the correctors
  CHECK(run_experiment(c, log).exit_code == exit_config_error);
  fs::remove_all(c.output_dir);
}

TEST_CASE("short linear evolution") {
  ExperimentConfig c;
  c.kind = ExperimentKind::evolve_linear;
  c.grids = {48};
  c.seeds = {3};
  c.t_final = 2.0;
  c.output_dir = scratch("linear").string();
  std::ostringstream log;
  const ExperimentOutcome r = run_experiment(c, log);
  REQUIRE(r.exit_code == exit_ok);
  const auto j = nlohmann::json::parse(slurp(fs::path(r.output_dir) / "summary.json"));
  CHECK(j["runs"].size() == 1);
  CHECK(j["runs"][0]["max_bc_defect"].get<double>() < 1e-8);
  fs::remove_all(c.output_dir);
}
