#pragma once

#include <array>
#include <vector>

#include "shearstab/airy.hpp"
#include "shearstab/orr_sommerfeld.hpp"

namespace shearstab {

/// Airy boundary-layer correctors for one (nu, alpha, lambda).
///
/// W_app,1(y) = Ai(e^{-i pi/6} L1 (y + 1 + d1)) and
/// W_app,2(y) = Ai(e^{-i pi/6} L2 (1 - y - d2)) are stored divided by their
/// normalizers a0_j = int_{W-argument at the wall}^{inf} Ai, so every bound of
/// the form C |A0| reads C after normalization.
struct AiryCorrectorSet {
  double nu = 0.0;
  int alpha = 1;
  double lambda = 0.0;
  int n = 0;

  double L1 = 0.0, L2 = 0.0;
  cplx d1, d2;
  ScaledValue a0_1, a0_2;        // normalizers used for W_app
  cplx a0_paper_1, a0_paper_2;   // airy_a0(L_j d_j, j) as literally defined

  Field w_app_1, w_app_2;
  Field psi_app_1, psi_app_2;
  cplx A_app1, A_app2, B_app1, B_app2;

  // Route (a): W_app plus the Navier-slip error correction.
  Field w_err_1, w_err_2;
  cplx A1, A2, B1, B2;
  Eigen::Matrix2cd C;
  Field w_cor_1, w_cor_2;
  bool coefficient_condition = true;   // |A1 A2 - B1 B2| >= |B1 B2| / 2

  // Route (b): clamped solve with psi' data.
  Field w_cor_direct_1, w_cor_direct_2;
  double direct_bc_defect = 0.0;

  // Airy-only approximation (error terms dropped) and the route gaps.
  Field w_cor_airy_1, w_cor_airy_2;
  std::array<double, 2> gap_airy{0.0, 0.0};    // |airy - direct| / |direct|
  std::array<double, 2> gap_exact{0.0, 0.0};   // |route (a) - direct| / |direct|

  std::vector<EstimateCheck> checks;
};

/// Smallest grid size >= n_min with at least `points` nodes inside each wall
/// layer of width 1 / (L_j (1 + |L_j d_j|)^{1/2}).
int corrector_grid_size(const FlowProfile& profile, double nu, int alpha, double lambda,
                        int n_min = 64, int points = 8);

/// W_app, Psi_app, the approximate coefficients and the W_app bound ratios.
AiryCorrectorSet build_approx(const SpectralWorkspace& ws, const FlowProfile& profile,
                              double nu, int alpha, double lambda);

/// Both corrector routes. Throws PreconditionError if min(L1, L2) < threshold.
AiryCorrectorSet build_correctors(const SpectralWorkspace& ws, const FlowProfile& profile,
                                  const OSProblem& prob, double threshold = 10.0);

/// Sinh kernels K+(y) = sinh(a(1+y))/sinh(2a), K-(y) = sinh(a(1-y))/sinh(2a) on the nodes.
std::pair<RVec, RVec> sinh_kernels(const SpectralWorkspace& ws, int alpha);

/// w = w_na + c1 w_cor,1 + c2 w_cor,2 for forcing F.
struct NonslipDecomposition {
  Field w_na;
  Field w;
  cplx c1, c2;
  double bc_defect = 0.0;   // max |psi'(+-1)| / max |psi'|
  double mismatch = 0.0;    // |w - w_clamped| / |w_clamped|
};

NonslipDecomposition decompose_nonslip(const SpectralWorkspace& ws, const FlowProfile& profile,
                                       const OSProblem& prob, const Field& F,
                                       const AiryCorrectorSet& set);

/// c1 = -int K+ w_na, c2 = int K- w_na for the Navier-slip solution w_na.
std::pair<cplx, cplx> corrector_coefficients(const SpectralWorkspace& ws,
                                             const FlowProfile& profile, const OSProblem& prob,
                                             const Field& F);

/// |c1| + |c2| against the L2, H^{-1} and H^1 right-hand sides.
std::vector<EstimateCheck> check_c_bounds(const SpectralWorkspace& ws, const FlowProfile& profile,
                                          const OSProblem& prob, const Field& F);

}  // namespace shearstab
