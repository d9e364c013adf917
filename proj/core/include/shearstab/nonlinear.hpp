#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shearstab/estimate.hpp"
#include "shearstab/evolution.hpp"

namespace shearstab {

enum class Verdict { stable, transitioned, inconclusive };

std::string to_string(Verdict v);

/// Fourier modes 0..K of the perturbation; mode -a is the conjugate of mode a.
/// The zero mode is carried as the streamwise velocity u10 with vorticity -d_y u10.
struct NonlinearState {
  double nu = 0.0;
  double time = 0.0;
  int K = 0;
  CVec u10;
  std::vector<CVec> omega;            // omega[a] for a = 1..K; omega[0] = -d_y u10
  std::vector<double> energy_ledger;  // E_a(t) for a = 0..K

  /// Vorticity of mode a in -K..K.
  CVec mode(int a) const;
};

/// Initial data: u10 and omega[a - 1] for modes a = 1..K.
struct NonlinearData {
  CVec u10;
  std::vector<CVec> omega;
};

struct NonlinearOptions {
  double dt = 0.05;
  double t_final = 100.0;
  double eps_weight = 0.05;
  BoundaryCondition bc = BoundaryCondition::non_slip;
  bool nonlinear = true;
  /// false: no background shear (U = 0, walls w = 0), used for the energy diagnostic.
  bool background = true;
  int record_stride = 10;
  double blowup_factor = 1e6;
  double stable_energy_factor = 4.0;   // sum E(T) <= factor * sum E(0)
  double linear_factor = 10.0;         // |omega_a(T)| <= factor * linear prediction
  double transition_factor = 10.0;     // sum |omega_{a != 0}| > factor * initial
  int dt_retries = 1;
};

struct NonlinearSeries {
  std::vector<double> t;
  std::vector<double> omega_nonzero;   // sum over a != 0 of ||omega_a||
  std::vector<double> kinetic_energy;
  std::vector<double> energy_sum;      // sum_a E_a(t)
};

struct NonlinearRun {
  double nu = 0.0;
  int K = 0;
  int n = 0;
  double amplitude = 0.0;
  double dt = 0.0;
  Verdict verdict = Verdict::inconclusive;
  bool blowup = false;
  bool dt_retried = false;      // a blow-up disappeared after halving dt
  NonlinearState final_state;
  NonlinearSeries series;
  double energy_initial = 0.0;  // sum_a E_a(0)
  double energy_final = 0.0;
  double energy_max = 0.0;
  double omega_initial = 0.0;   // sum over a != 0 of ||omega_a(0)||
  double omega_max = 0.0;
  std::vector<double> linear_prediction;  // ||omega_a(T)|| with the nonlinearity off, a = 1..K
  std::vector<double> nonlinear_final;    // ||omega_a(T)||, a = 1..K
  double reality_defect = 0.0;            // max_t |Im u10| / max |u10|
  double zero_mode_residual = 0.0;        // relative midpoint residual of the u10 equation
  double data_h4 = 0.0;                   // sum over -K..K of ||omega_a||_{H^4_a}
  EstimateCheck bootstrap;
};

/// Sum over a in -K..K of ||omega_a||_{H^4_a}, with omega_0 = -d_y u10.
double data_h4_sum(const SpectralWorkspace& ws, const NonlinearData& data);

/// Seeded compatible data on modes 1..K with zero mean flow.
NonlinearData seeded_multimode(const SpectralWorkspace& ws, int K, std::uint64_t seed);

/// IMEX run: Crank-Nicolson per mode, Adams-Bashforth 2 for the truncated
/// convolution fluxes. The data is rescaled to the given H^4 amplitude.
NonlinearRun run_nonlinear(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                           int K, const NonlinearData& data, double amplitude,
                           const NonlinearOptions& opts = {});

struct ThresholdRow {
  double nu = 0.0;
  double A = 0.0;           // amplitude = A nu^{2/3}
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  Verdict verdict = Verdict::inconclusive;
  bool blowup = false;
  double final_E = 0.0;
  double max_E = 0.0;
};

struct ThresholdColumn {
  double nu = 0.0;
  double A_star = 0.0;      // smallest A with a transitioned majority; NaN when undefined
  std::string status;       // "ok", "all_stable", "all_transitioned"
};

struct ThresholdTable {
  std::vector<ThresholdRow> rows;
  std::vector<ThresholdColumn> columns;
  int violations = 0;       // stable cells above a transitioned cell of the same (nu, seed)
  int cells = 0;
  ScalingFit fit;           // A* against nu where defined
  std::vector<EstimateCheck> bootstrap;
};

ThresholdTable threshold_sweep(const SpectralWorkspace& ws, const FlowProfile& profile,
                               const std::vector<double>& nus, const std::vector<double>& A,
                               const std::vector<std::uint64_t>& seeds, int K,
                               const NonlinearOptions& opts, int threads = 1);

/// Relative max error of the zero-mode-only run against the heat semigroup for cos(pi y / 2).
double heat_oracle_error(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                         double t_final, double dt);

}  // namespace shearstab
