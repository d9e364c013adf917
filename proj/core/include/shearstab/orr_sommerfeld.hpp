#pragma once

#include <vector>

#include "shearstab/estimate.hpp"
#include "shearstab/spectral.hpp"

namespace shearstab {

enum class BoundaryCondition { navier_slip, non_slip };

BoundaryCondition parse_bc(const std::string& s);
std::string to_string(BoundaryCondition bc);

struct OSProblem {
  double nu = 1e-3;
  int alpha = 1;
  double lambda = 0.0;
  BoundaryCondition bc = BoundaryCondition::non_slip;
  cplx o_shift{0.0, 0.0};
};

/// Checks nu in (0, nu0] and |o_shift| <= eps0 nu^{1/2} alpha^{1/2}.
void validate(const OSProblem& prob, double nu0 = 1e-2, double eps0 = 0.1);

struct OSSolution {
  Field w;
  Field psi;
  Field u1;   // -psi'
  Field u2;   // i alpha psi
  double residual = 0.0;
  double bc_defect = 0.0;
};

/// Assembled and factored Orr-Sommerfeld operator
///   -nu (d^2 - alpha^2) w + i alpha (U - lambda) w - i alpha U'' psi + o w = F
/// in vorticity unknowns. Navier-slip imposes w(+-1) = 0; non-slip imposes
/// psi'(+-1) = 0 through the rows of d1 * S, which together with psi(+-1) = 0
/// from S gives the clamped conditions.
class OSOperator {
 public:
  OSOperator(const SpectralWorkspace& ws, const FlowProfile& profile, const OSProblem& prob);

  /// Boundary data: psi'(+1), psi'(-1) for non-slip, w(+1), w(-1) for Navier-slip.
  OSSolution solve(const Field& F, cplx top = 0.0, cplx bottom = 0.0) const;

  /// Solution map from interior forcing values to w (n x (n-2)).
  CMat solution_map() const;

  const OSProblem& problem() const { return prob_; }
  const CMat& matrix() const { return a_; }
  const SpectralWorkspace& workspace() const { return ws_; }

 private:
  const SpectralWorkspace& ws_;
  OSProblem prob_;
  CMat a_;
  Eigen::PartialPivLU<CMat> lu_;
};

OSSolution solve_os(const SpectralWorkspace& ws, const FlowProfile& profile,
                    const OSProblem& prob, const Field& F);

enum class NormPair { L2_L2w, Hm1_L2w, Hm1_L2u, L2_L2u, H1_L2u, L2_Linfu, H1_Linfu, H1_L2w };

NormPair parse_norm_pair(const std::string& s);
std::string to_string(NormPair p);
const std::vector<NormPair>& all_norm_pairs();

/// Input norms are L2, H^{-1} (dual of H^1_0 under (d_y,|alpha|)) and
/// ||(d_y,|alpha|) F||; outputs are ||w||_{L2}, ||u||_{L2} and sup |u|.
class ResolventEvaluator {
 public:
  ResolventEvaluator(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                     int alpha, BoundaryCondition bc, cplx o_shift = 0.0);

  std::vector<double> evaluate(double lambda, const std::vector<NormPair>& pairs) const;

 private:
  const SpectralWorkspace& ws_;
  const FlowProfile& profile_;
  double nu_;
  int alpha_;
  BoundaryCondition bc_;
  cplx o_shift_;
  RMat t_l2_;    // diagonal q^{-1/2} (interior)
  RMat t_hm1_;   // q^{-1} L
  RMat t_h1_;    // L^{-T}
  RMat out_u_;   // L^T S_int
};

double resolvent_norm(const SpectralWorkspace& ws, const FlowProfile& profile,
                      const OSProblem& prob, NormPair pair);

struct ScanOptions {
  int points = 101;
  int threads = 1;
  cplx o_shift{0.0, 0.0};
  double refine_tol = 0.005;
  int max_refinements = 24;
};

struct ResolventScan {
  OSProblem problem;                 // lambda unused
  std::vector<NormPair> pairs;
  std::vector<double> lambda_grid;   // all evaluated points, sorted
  std::vector<std::vector<double>> norms;   // [lambda index][pair]
  std::vector<double> sup_norm;      // per pair
  std::vector<double> argmax_lambda; // per pair
  std::vector<double> last_change;   // relative change of the final refinement round
  bool tail_decreasing = true;
  int evaluations = 0;
};

/// Initial lambda grid: [U(0)-1, U(1)+1] plus the regime split points.
std::vector<double> initial_lambda_grid(const FlowProfile& profile, double nu, int alpha,
                                        int points);

ResolventScan scan_lambda(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                          int alpha, BoundaryCondition bc, const std::vector<NormPair>& pairs,
                          const ScanOptions& opts = {});

/// Growth exponent table: sup-norm ~ nu^{-exponent}.
double paper_exponent(BoundaryCondition bc, NormPair pair);

/// Fit of sup norms against nu.
ScalingFit fit_scaling(const std::vector<ResolventScan>& scans, std::size_t pair_index);

/// Energy checks for a Navier-slip solve; checks outside their lambda regime are
/// returned as skipped.
std::vector<EstimateCheck> check_energy_estimates(const SpectralWorkspace& ws,
                                                  const FlowProfile& profile,
                                                  const OSProblem& prob, const Field& F);

/// Weak-type ratio |<w/U'', U'' psi>| against the Ray_{delta_1} based bound.
EstimateCheck check_weak_type(const SpectralWorkspace& ws, const FlowProfile& profile,
                              const OSProblem& prob, const Field& F);

}  // namespace shearstab
