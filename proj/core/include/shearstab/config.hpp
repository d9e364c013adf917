#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shearstab/orr_sommerfeld.hpp"
#include "shearstab/profiles.hpp"

namespace shearstab {

enum class ExperimentKind {
  resolvent_scan,
  coercivity_check,
  corrector_check,
  airy_table,
  evolve_linear,
  evolve_euler,
  evolve_nonlinear,
  threshold_sweep,
  estimate_sweep,
  accept
};

ExperimentKind parse_experiment_kind(const std::string& s);
std::string to_string(ExperimentKind k);
const std::vector<ExperimentKind>& all_experiment_kinds();

/// Whether the experiment draws seeded random data.
bool uses_seed(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::accept;

  ProfileKind profile = ProfileKind::poiseuille;
  std::vector<double> profile_coefficients;

  std::vector<int> grids{128};
  std::vector<double> nus{1e-3};
  std::vector<int> alphas{1};
  std::vector<double> lambdas{0.5};
  std::vector<BoundaryCondition> bcs{BoundaryCondition::non_slip};
  std::vector<NormPair> pairs;   // empty: the exponent table of each bc
  std::vector<std::uint64_t> seeds;
  int samples = 100;

  double nu0 = 1e-2;
  double eps0 = 0.1;
  double corrector_threshold = 10.0;
  double o_shift = 0.0;          // |o| in units of nu^{1/2} alpha^{1/2}

  int scan_points = 101;
  double scan_refine_tol = 0.005;

  double dt = 0.05;
  double t_final = 0.0;          // 0: 5 nu^{-1/2}
  double eps_weight = 0.05;
  int record_stride = 10;
  int checkpoint_every = 0;

  double euler_t_final = 100.0;
  double euler_dt = 0.02;
  int euler_n_max = 768;
  double euler_tail_tolerance = 1e-7;

  int modes = 8;                 // K
  std::vector<double> amplitudes{0.01};   // A, amplitude = A nu^{2/3}
  double nonlinear_t_final = 100.0;
  double nonlinear_dt = 0.05;

  std::vector<double> airy_radii{0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0};
  int airy_angles = 24;

  std::vector<int> criteria;     // acceptance subset; empty: all

  std::string output_dir = "out";
  int threads = 1;
};

/// Parses TOML text; throws ConfigError on syntax errors or invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Throws ConfigError when an invariant is violated.
void validate(const ExperimentConfig& cfg);

/// Log-spaced values lo..hi inclusive.
std::vector<double> log_space(double lo, double hi, int count);

}  // namespace shearstab
