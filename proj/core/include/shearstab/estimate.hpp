#pragma once

#include <map>
#include <string>
#include <vector>

namespace shearstab {

/// One evaluated inequality instance "lhs <~ rhs".
struct EstimateCheck {
  std::string check_id;
  std::map<std::string, double> params;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool rhs_zero = false;
  bool refinement_stable = true;
  bool skipped = false;
  std::string note;
  int n = 0;
};

EstimateCheck make_check(std::string id, double lhs, double rhs, int n,
                         std::map<std::string, double> params = {});

EstimateCheck skipped_check(std::string id, std::string reason,
                            std::map<std::string, double> params = {});

/// Log-log least squares fit values ~ exp(intercept) * nus^slope.
struct ScalingFit {
  std::vector<double> nus;
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

ScalingFit fit_power_law(const std::vector<double>& xs,
                         const std::vector<double>& ys);

/// Linear least squares of ys against xs; returns (slope, intercept, r2).
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace shearstab
