#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "shearstab/experiment.hpp"

namespace {

using namespace shearstab;

struct CommonFlags {
  std::string config;
  std::string out;
  int threads = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<int> criteria;
};

int run(ExperimentKind kind, const CommonFlags& f) {
  ExperimentConfig cfg;
  try {
    if (!f.config.empty()) cfg = load_config(f.config);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config_error;
  }
  cfg.kind = kind;
  if (const char* env = std::getenv("SHEARSTAB_OUT"); env && *env) cfg.output_dir = env;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.threads > 0) cfg.threads = f.threads;
  if (!f.seeds.empty()) cfg.seeds = f.seeds;
  if (!f.criteria.empty()) cfg.criteria = f.criteria;
  if (kind == ExperimentKind::accept && cfg.seeds.empty()) cfg.seeds = {42};

  const ExperimentOutcome r = run_experiment(cfg, std::cout);
  if (r.exit_code == exit_ok)
    std::cout << "results written to " << r.output_dir << "\n";
  else
    std::cerr << r.message << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orr-Sommerfeld, Rayleigh and Airy boundary-layer workbench for channel flows"};
  app.require_subcommand(1);
  CommonFlags flags;
  ExperimentKind chosen = ExperimentKind::accept;

  for (ExperimentKind kind : all_experiment_kinds()) {
    auto* sub = app.add_subcommand(to_string(kind));
    sub->add_option("--config,-c", flags.config, "TOML experiment configuration")
        ->check(CLI::ExistingFile);
    sub->add_option("--out,-o", flags.out, "Output directory (overrides SHEARSTAB_OUT)");
    sub->add_option("--threads,-j", flags.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seeds, "Random seed(s)");
    if (kind == ExperimentKind::accept)
      sub->add_option("--criteria", flags.criteria, "Subset of criteria 1..10")
          ->delimiter(',')
          ->check(CLI::Range(1, 10));
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config_error;
  }
  return run(chosen, flags);
}
