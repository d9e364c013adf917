#include "shearstab/rayleigh.hpp"

#include <cmath>

namespace shearstab {

RayleighSolution solve_ray_delta(const SpectralWorkspace& ws, const FlowProfile& profile,
                                 int alpha, double lambda, double delta, const Field& f) {
  if (alpha < 1) throw PreconditionError("solve_ray_delta: alpha must be >= 1");
  if (!(std::abs(delta) >= 1e-12))
    throw PreconditionError("solve_ray_delta: |delta| must be at least 1e-12");
  if (f.size() != ws.n()) throw PreconditionError("solve_ray_delta: size mismatch");
  const auto prof = ws.sample(profile);
  const HelmholtzOperator& h = ws.helmholtz(alpha);
  const int n = ws.n();
  CMat m = -(prof.d2u.asDiagonal() * h.S).cast<cplx>();
  for (int j = 0; j < n; ++j) m(j, j) += cplx(prof.u(j) - lambda, delta);
  Eigen::PartialPivLU<CMat> lu(m);
  RayleighSolution sol;
  sol.alpha = alpha;
  sol.lambda = lambda;
  sol.delta = delta;
  CVec wv = lu.solve(f.values);
  wv += lu.solve((f.values - m * wv).eval());
  sol.w = Field(wv, alpha);
  sol.psi = Field(h.S * wv, alpha);
  const double fn = l2_norm(ws, f.values);
  const double rn = l2_norm(ws, f.values - m * wv);
  sol.residual = fn > 0 ? rn / fn : rn;
  if (!std::isfinite(sol.residual)) throw NumericalError("solve_ray_delta: singular system");
  return sol;
}

EstimateCheck check_ray_bounds(const SpectralWorkspace& ws, const FlowProfile& profile,
                               const RayleighSolution& sol, const Field& f) {
  const double fn = l2_norm(ws, f.values);
  const double tol = 1e-12 * std::max(1.0, fn);
  if (std::abs(f.values(0)) > tol || std::abs(f.values(ws.n() - 1)) > tol)
    throw PreconditionError("check_ray_bounds: f must vanish at the walls");
  const auto prof = ws.sample(profile);
  const double d = std::abs(sol.delta);
  const double lhs = norm(ws, sol.psi, NormKind::grad_alpha) +
                     std::sqrt(d) * l2_norm(ws, sol.w.values) +
                     std::pow(d, 1.5) / std::sqrt(std::abs(sol.lambda - profile.u_min()) + d) *
                         l2_norm(ws, ws.d1() * sol.w.values);
  const Field g((f.values.array() / prof.d2u.array().cast<cplx>()).matrix(), sol.alpha);
  const double rhs = norm(ws, g, NormKind::grad_alpha);
  return make_check("lemma3.6", lhs, rhs, ws.n(),
                    {{"alpha", sol.alpha}, {"lambda", sol.lambda}, {"delta", sol.delta}});
}

CoercivityProbe::CoercivityProbe(const SpectralWorkspace& ws, const FlowProfile& profile,
                                 int alpha, double lambda, double theta)
    : ws_(ws),
      alpha_(alpha),
      layer_(make_critical_layer(profile, lambda, 0.0, theta)),
      splitter_(ws, alpha, layer_) {
  const double len = layer_.y2 - layer_.y1;
  if (!(layer_.theta > 0.0 && layer_.theta <= 0.25 * len * (1.0 + 1e-12)))
    throw PreconditionError("check_single_point: theta must lie in (0, (y2-y1)/4]");
  const ChebGrid& mid = splitter_.piece(1);
  const int m = mid.n;
  lam_minus_u_.resize(m);
  d2u_.resize(m);
  du_.resize(m);
  for (int j = 0; j < m; ++j) {
    const double y = mid.nodes(j);
    lam_minus_u_(j) = lambda - profile.u(y);
    d2u_(j) = profile.d2u(y);
    du_(j) = profile.du(y);
  }
  const ChebGrid win = ChebGrid::build(m, layer_.y1 + layer_.theta, layer_.y2 - layer_.theta);
  window_interp_ = mid.interpolation_matrix(win.nodes);
  window_weight_.resize(m);
  for (int j = 0; j < m; ++j) window_weight_(j) = win.quad(j) * profile.d2u(win.nodes(j));
  RVec zero(1);
  zero(0) = 0.0;
  at_zero_ = mid.interpolation_matrix(zero);
}

CoercivityReport CoercivityProbe::evaluate(const Field& w) const {
  const SplitStream s = splitter_.split(w);
  const ChebGrid& mid = splitter_.piece(1);
  const int m = mid.n;
  const CVec& psi = s.psi1_piece[1];
  const CVec& dpsi = s.dpsi1_piece[1];
  const CVec& wp = s.w_piece[1];
  const auto& q = mid.quad.array();

  // g = psi1 / (lambda - U), with the local expansion at the critical points.
  CVec g(m);
  constexpr double band = 1e-6;
  for (int j = 0; j < m; ++j) {
    const double y = mid.nodes(j);
    const double h2 = y - layer_.y2, h1 = y - layer_.y1;
    if (std::abs(h2) < band || std::abs(h1) < band) {
      const int e = std::abs(h2) < band ? 0 : m - 1;
      const double h = std::abs(h2) < band ? h2 : h1;
      g(j) = (dpsi(e) + 0.5 * wp(e) * h) / (-du_(e) - 0.5 * d2u_(e) * h);
    } else {
      g(j) = psi(j) / lam_minus_u_(j);
    }
  }
  const CVec gp = mid.d1 * g;
  const double a2 = static_cast<double>(alpha_) * alpha_;
  const double A = (q * lam_minus_u_.array().square() * gp.array().abs2()).sum();
  const double B = a2 * (q * psi.array().abs2()).sum();
  const double T1 = (q * lam_minus_u_.array() * wp.array().abs2() / d2u_.array()).sum();
  const cplx pair = (q.cast<cplx>() * psi.array() * wp.array().conjugate()).sum();
  const double T2 = pair.real();
  const double len = layer_.y2 - layer_.y1;
  const cplx psi0 = (at_zero_ * psi)(0);
  const cplx weighted = (window_weight_.array().cast<cplx>() * (window_interp_ * g).array()).sum();

  const std::map<std::string, double> params{
      {"alpha", alpha_}, {"lambda", layer_.lambda}, {"theta", layer_.theta}};
  CoercivityReport r;
  r.coercive_l2 = make_check("lemma2.1a", A + B, T1 + T2, ws_.n(), params);
  r.margin = (T1 + T2) - (A + B);
  r.scale = T1 + std::abs(T2) + A + B;
  r.coercive_l2.params["margin"] = r.margin;
  r.coercive_h1 = make_check("lemma2.1b", len * len * (T1 - T2), T1 + T2, ws_.n(), params);
  r.hardy = make_check("lemma2.2", (q * g.array().abs2()).sum(),
                       A / (len * len) + std::norm(psi0) / (len * len * len), ws_.n(), params);
  r.single_point = make_check("lemma2.3", std::norm(psi0) / (len * len * len),
                              (T1 + T2) / (len * len) + std::norm(weighted) / len, ws_.n(),
                              params);
  r.pairing_unconjugated = (q.cast<cplx>() * psi.array() * wp.array()).sum();
  r.coercive_l2.params["pairing_noconj_re"] = r.pairing_unconjugated.real();
  r.coercive_l2.params["pairing_noconj_im"] = r.pairing_unconjugated.imag();
  return r;
}

std::pair<EstimateCheck, EstimateCheck> check_coercive(const SpectralWorkspace& ws,
                                                       const FlowProfile& profile,
                                                       int alpha, double lambda,
                                                       const Field& w) {
  const CoercivityReport r = CoercivityProbe(ws, profile, alpha, lambda).evaluate(w);
  return {r.coercive_l2, r.coercive_h1};
}

EstimateCheck check_hardy_type(const SpectralWorkspace& ws, const FlowProfile& profile,
                               int alpha, double lambda, const Field& w) {
  return CoercivityProbe(ws, profile, alpha, lambda).evaluate(w).hardy;
}

EstimateCheck check_single_point(const SpectralWorkspace& ws, const FlowProfile& profile,
                                 int alpha, double lambda, double theta, const Field& w) {
  const CriticalLayer layer = make_critical_layer(profile, lambda);
  if (!(theta > 0.0 && theta <= 0.25 * (layer.y2 - layer.y1) * (1.0 + 1e-12)))
    throw PreconditionError("check_single_point: theta must lie in (0, (y2-y1)/4]");
  return CoercivityProbe(ws, profile, alpha, lambda, theta).evaluate(w).single_point;
}

}  // namespace shearstab
