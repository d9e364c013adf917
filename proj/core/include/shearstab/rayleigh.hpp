#pragma once

#include "shearstab/estimate.hpp"
#include "shearstab/spectral.hpp"

namespace shearstab {

/// Solution of (U - lambda + i delta) W - U'' Psi = f, (d^2 - alpha^2) Psi = W.
struct RayleighSolution {
  Field w;
  Field psi;
  double lambda = 0.0;
  double delta = 0.0;
  int alpha = 0;
  double residual = 0.0;
};

RayleighSolution solve_ray_delta(const SpectralWorkspace& ws, const FlowProfile& profile,
                                 int alpha, double lambda, double delta, const Field& f);

/// Limiting-absorption bound for W, Psi; f must vanish at the walls.
EstimateCheck check_ray_bounds(const SpectralWorkspace& ws, const FlowProfile& profile,
                               const RayleighSolution& sol, const Field& f);

/// All interior coercivity checks for one field around one critical layer.
struct CoercivityReport {
  EstimateCheck coercive_l2;     // lemma2.1a, margin = rhs - lhs
  EstimateCheck coercive_h1;     // lemma2.1b ratio
  EstimateCheck hardy;           // lemma2.2
  EstimateCheck single_point;    // lemma2.3
  double margin = 0.0;
  double scale = 0.0;
  /// The pairing <psi1, chi w> without conjugation, kept for debugging.
  cplx pairing_unconjugated{0.0, 0.0};
};

/// Precomputes the piecewise solvers for (alpha, lambda) so that many fields
/// can be checked cheaply.
class CoercivityProbe {
 public:
  CoercivityProbe(const SpectralWorkspace& ws, const FlowProfile& profile, int alpha,
                  double lambda, double theta = 0.0);

  CoercivityReport evaluate(const Field& w) const;
  const CriticalLayer& layer() const { return layer_; }

 private:
  const SpectralWorkspace& ws_;
  int alpha_;
  CriticalLayer layer_;
  StreamSplitter splitter_;
  RVec lam_minus_u_;   // lambda - U on the middle piece
  RVec d2u_;
  RVec du_;
  RMat window_interp_;  // middle piece -> nodes of [y1+theta, y2-theta]
  RVec window_weight_;  // quadrature times U'' on the window
  RMat at_zero_;
};

std::pair<EstimateCheck, EstimateCheck> check_coercive(const SpectralWorkspace& ws,
                                                       const FlowProfile& profile,
                                                       int alpha, double lambda,
                                                       const Field& w);
EstimateCheck check_hardy_type(const SpectralWorkspace& ws, const FlowProfile& profile,
                               int alpha, double lambda, const Field& w);
EstimateCheck check_single_point(const SpectralWorkspace& ws, const FlowProfile& profile,
                                 int alpha, double lambda, double theta, const Field& w);

}  // namespace shearstab
