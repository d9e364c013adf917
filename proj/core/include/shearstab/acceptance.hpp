#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace shearstab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;          // numerical verdict, deterministic
  double seconds = 0.0;
  double budget_seconds = 0.0;  // wall-clock budget; 0 means none
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;

  bool within_budget() const { return budget_seconds <= 0.0 || seconds <= budget_seconds; }
};

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  int threads = 1;
  std::vector<int> criteria;    // empty: all ten
  int rerun_threads = 0;        // threads for the determinism rerun; 0: threads + 1
  std::function<void(const CriterionResult&)> on_result;
};

/// Runs the acceptance criteria in order. Criterion 10 reruns criteria 1-9
/// with a different thread count and compares the summary JSON byte for byte.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

/// Runs one criterion in 1..9.
CriterionResult run_criterion(int id, std::uint64_t seed, int threads);

/// Deterministic summary: verdicts, details and metrics, no timings.
std::string acceptance_summary_json(const std::vector<CriterionResult>& results,
                                    std::uint64_t seed);

/// Wall-clock timings per criterion.
std::string acceptance_timings_json(const std::vector<CriterionResult>& results);

/// One line "criterion N (name): PASS|FAIL ..." for console output.
std::string format_result(const CriterionResult& r);

}  // namespace shearstab
