#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "shearstab/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  shearstab::AcceptanceOptions opts;
  std::string summary;
  app.add_option("--seed", opts.seed, "Random seed");
  app.add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--criteria", opts.criteria, "Subset of criteria 1..10")
      ->delimiter(',')
      ->check(CLI::Range(1, 10));
  app.add_option("--summary", summary, "Write the summary JSON to this file");
  CLI11_PARSE(app, argc, argv);

  opts.on_result = [](const shearstab::CriterionResult& r) {
    std::cout << shearstab::format_result(r) << std::endl;
  };
  const auto results = shearstab::run_acceptance(opts);

  int failed = 0;
  for (const auto& r : results)
    if (!r.passed || !r.within_budget()) ++failed;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  if (!summary.empty()) {
    std::ofstream(summary) << shearstab::acceptance_summary_json(results, opts.seed);
  }
  return failed == 0 ? 0 : 1;
}
