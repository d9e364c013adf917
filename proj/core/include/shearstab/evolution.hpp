#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "shearstab/estimate.hpp"
#include "shearstab/orr_sommerfeld.hpp"

namespace shearstab {

/// Forcing i alpha f1 + d_y f2; either component may be empty.
struct Forcing {
  std::function<CVec(double t, const RVec& y)> f1;
  std::function<CVec(double t, const RVec& y)> f2;

  bool active() const { return static_cast<bool>(f1) || static_cast<bool>(f2); }
};

struct EvolutionOptions {
  double dt = 0.05;
  double t_final = 10.0;
  double eps_weight = 0.05;
  BoundaryCondition bc = BoundaryCondition::non_slip;
  /// Pure diffusion nu (d^2 - alpha^2) with w(+-1) = 0; advection and U'' dropped.
  bool diffusion_only = false;
  bool project = true;        // remove the e^{+-alpha y} components of the data
  int record_stride = 1;
  double blowup_factor = 1e6;
  std::string checkpoint_dir;   // empty: no checkpoints
  int checkpoint_every = 0;     // steps between checkpoints
};

/// Time series sampled every record_stride steps.
struct EvolutionSeries {
  std::vector<double> t;
  std::vector<double> omega_l2;
  std::vector<double> u_l2;
  std::vector<double> u_linf;
  std::vector<double> dy_phi;      // ||d_y phi||
  std::vector<double> alpha_phi;   // ||alpha phi||
  std::vector<double> omega_center; // |omega(t, 0)|
  std::vector<double> energy_residual;
};

struct EvolutionRun {
  double nu = 0.0;
  int alpha = 1;
  int n = 0;
  double dt = 0.0;
  double t_final = 0.0;
  double eps_weight = 0.0;
  BoundaryCondition bc = BoundaryCondition::non_slip;
  /// Weighted space-time functionals, squared, with the theorem prefactors:
  /// u_LinfL2, u_L2L2, u_LinfLinf, omega_L2L2, omega_LinfL2, dy_omega_L2L2,
  /// weighted_omega_LinfL2. The *_raw entries omit the nu and alpha prefactors.
  std::map<std::string, double> functionals;
  double forcing_l2 = 0.0;        // ||e^{eps nu^{1/2} t} (f1, f2)||^2_{L2_{t,y}}
  double data_h4 = 0.0;           // ||omega_in||_{H^4_alpha} after projection
  double projection_change = 0.0; // relative change made by the projection
  double max_bc_defect = 0.0;     // max_t |psi'(+-1)| / ||psi||
  double max_energy_residual = 0.0;
  EvolutionSeries series;
  Field omega_final;
};

/// Implicit Euler sub-steps replacing the first Crank-Nicolson step.
inline constexpr int kStartupSteps = 4;

/// Theta scheme for one mode of d_t w = -A w + g. With constraints the wall
/// rows hold w(+-1) = 0 (Navier-slip, diffusion) or psi'(+-1) = 0 (non-slip);
/// the inviscid stepper has none.
class ModeStepper {
 public:
  ModeStepper(const SpectralWorkspace& ws, const FlowProfile& profile, double nu, int alpha,
              double dt, BoundaryCondition bc, bool diffusion_only = false,
              bool inviscid = false, double theta = 0.5);

  /// Next state from w and the integral g of the source over the step (may be empty).
  CVec step(const CVec& w, CVec g) const;
  double dt() const { return dt_; }

 private:
  Eigen::PartialPivLU<CMat> lhs_;
  CMat rhs_;
  bool constrained_ = true;
  double dt_ = 0.0;
};

/// Accuracy limit on the step: dt <= 0.5 / (alpha max|U|).
double dt_max(const FlowProfile& profile, double nu, int alpha, int n);

/// Removes the e^{+-alpha y} components under the quadrature pairing.
Field project_compatible(const SpectralWorkspace& ws, const Field& w, double* change = nullptr);

/// Seeded smooth data with ||.||_{H^4_alpha} = 1 (after projection when requested).
Field seeded_data(const SpectralWorkspace& ws, int alpha, std::uint64_t seed, bool project = true);

EvolutionRun run_linear(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                        int alpha, const Field& omega_in, const Forcing& forcing,
                        const EvolutionOptions& opts);

struct RateFit {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double rate = 0.0;   // -d/dt log ||omega||, or the power-law exponent for Euler fits
  double r2 = 0.0;
};

/// Decay rate of log ||omega(t)|| on [nu^{-1/2}, 5 nu^{-1/2}].
RateFit decay_rate(const EvolutionRun& run);

struct EnhancedDissipation {
  std::vector<RateFit> fits;   // one per run
  ScalingFit exponent_vs_nu;   // rate ~ nu^{slope}
};

EnhancedDissipation measure_enhanced_dissipation(const std::vector<EvolutionRun>& runs);

struct EulerOptions {
  double dt = 0.02;
  double t_final = 100.0;
  double fit_start = 10.0;
  int n_max = 768;
  double tail_tolerance = 1e-7;
  int record_stride = 5;
};

struct EulerRun {
  EvolutionRun run;
  RateFit dy_phi;        // power-law exponent of ||d_y phi||
  RateFit alpha_phi;     // exponent of ||alpha phi||
  RateFit omega_center;  // exponent of |omega(t, 0)|
  double omega_bound_ratio = 0.0;   // max_t ||omega(t)|| / ||omega_in||_{H^1_alpha}
  bool truncated = false;           // window cut by the resolution monitor
  double t_resolved = 0.0;
};

/// nu = 0 evolution with psi(+-1) = 0; the grid is enlarged until the spectral
/// tail stays below tolerance or n_max is reached.
EulerRun run_euler(const FlowProfile& profile, int n, int alpha, std::uint64_t seed,
                   const EulerOptions& opts = {});
EulerRun run_euler(const SpectralWorkspace& ws, const FlowProfile& profile, int alpha,
                   const Field& omega_in, const EulerOptions& opts = {});

/// Sum of the weighted functionals over ||omega_in||^2_{H^4} + nu^{-1} forcing.
EstimateCheck verify_spacetime_bound(const EvolutionRun& run);

/// Flat binary checkpoint: one JSON header line, then interleaved re/im doubles.
void write_checkpoint(const std::string& path, const EvolutionRun& run, double t,
                      const CVec& omega);
CVec read_checkpoint(const std::string& path, std::string* header = nullptr);

/// Relative size of the top eighth of Chebyshev coefficients.
double spectral_tail(const SpectralWorkspace& ws, const CVec& f);

}  // namespace shearstab
