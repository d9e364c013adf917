#include "shearstab/orr_sommerfeld.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "shearstab/parallel.hpp"
#include "shearstab/rayleigh.hpp"

namespace shearstab {

namespace {

// Complex times real matrix products without promoting the real factor.
CMat cmul(const CMat& a, const RMat& b) {
  CMat out(a.rows(), b.cols());
  out.real() = a.real() * b;
  out.imag() = a.imag() * b;
  return out;
}

CMat rmul(const RMat& a, const CMat& b) {
  CMat out(a.rows(), b.cols());
  out.real() = a * b.real();
  out.imag() = a * b.imag();
  return out;
}

double sigma_max(const CMat& b) {
  if (b.size() == 0) return 0.0;
  CMat g = b.rows() >= b.cols() ? CMat(b.adjoint() * b) : CMat(b * b.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("resolvent: eigen solver failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Largest eigenvalue of the 2x2 Gram of the rows (a, alpha b).
double row_pair_norm2(const Eigen::RowVectorXcd& a, const Eigen::RowVectorXcd& b, double alpha) {
  const double p = a.squaredNorm();
  const double r = alpha * alpha * b.squaredNorm();
  const cplx c = alpha * a.dot(b);
  const double half = 0.5 * (p - r);
  return 0.5 * (p + r) + std::sqrt(half * half + std::norm(c));
}

// sup over y of the operator norm x -> (a(y) x, alpha b(y) x), where a and b
// are given by their nodal rows: maximum over nodes, then a golden-section
// search between the neighbours of the best node.
double max_row_norm(const ChebGrid& grid, const CMat& a, const CMat& b, double alpha) {
  const Eigen::Index n = a.rows();
  double best = -1.0;
  Eigen::Index jb = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = row_pair_norm2(a.row(j), b.row(j), alpha);
    if (v > best) {
      best = v;
      jb = j;
    }
  }
  auto at = [&](double y) {
    RVec t(1);
    t(0) = y;
    const RMat row = grid.interpolation_matrix(t);
    const Eigen::RowVectorXcd ra = row.cast<cplx>() * a;
    const Eigen::RowVectorXcd rb = row.cast<cplx>() * b;
    return row_pair_norm2(ra, rb, alpha);
  };
  double lo = grid.nodes(std::min<Eigen::Index>(jb + 1, n - 1));
  double hi = grid.nodes(std::max<Eigen::Index>(jb - 1, 0));
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = at(x1), f2 = at(x2);
  for (int it = 0; it < 40; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = at(x2);
    }
  }
  best = std::max({best, f1, f2});
  return std::sqrt(std::max(0.0, best));
}

}  // namespace

BoundaryCondition parse_bc(const std::string& s) {
  if (s == "navier_slip" || s == "navier-slip") return BoundaryCondition::navier_slip;
  if (s == "non_slip" || s == "non-slip") return BoundaryCondition::non_slip;
  throw ConfigError("unknown boundary condition: " + s);
}

std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::navier_slip ? "navier_slip" : "non_slip";
}

void validate(const OSProblem& prob, double nu0, double eps0) {
  if (!(prob.nu > 0.0 && prob.nu <= nu0))
    throw PreconditionError("OSProblem: nu must lie in (0, nu0]");
  if (prob.alpha < 1) throw PreconditionError("OSProblem: alpha must be >= 1");
  if (std::abs(prob.o_shift) > eps0 * std::sqrt(prob.nu * prob.alpha) * (1.0 + 1e-12))
    throw PreconditionError("OSProblem: |o_shift| exceeds eps0 nu^{1/2} alpha^{1/2}");
}

OSOperator::OSOperator(const SpectralWorkspace& ws, const FlowProfile& profile,
                       const OSProblem& prob)
    : ws_(ws), prob_(prob) {
  if (!(prob.nu > 0.0)) throw PreconditionError("OSOperator: nu must be positive");
  if (prob.alpha < 1) throw PreconditionError("OSOperator: alpha must be >= 1");
  const int n = ws.n();
  const double a = prob.alpha;
  const auto prof = ws.sample(profile);
  const HelmholtzOperator& h = ws.helmholtz(prob.alpha);

  a_ = CMat::Zero(n, n);
  a_.real() = -prob.nu * ws.d2();
  a_.imag() = -a * (prof.d2u.asDiagonal() * h.S);
  for (int j = 0; j < n; ++j)
    a_(j, j) += cplx(prob.nu * a * a, a * (prof.u(j) - prob.lambda)) + prob.o_shift;
  if (prob.bc == BoundaryCondition::navier_slip) {
    a_.row(0).setZero();
    a_.row(n - 1).setZero();
    a_(0, 0) = 1.0;
    a_(n - 1, n - 1) = 1.0;
  } else {
    a_.row(0) = h.DS.row(0).cast<cplx>();
    a_.row(n - 1) = h.DS.row(n - 1).cast<cplx>();
  }
  lu_.compute(a_);
}

OSSolution OSOperator::solve(const Field& F, cplx top, cplx bottom) const {
  const int n = ws_.n();
  if (F.size() != n) throw PreconditionError("solve_os: size mismatch");
  CVec rhs = F.values;
  rhs(0) = top;
  rhs(n - 1) = bottom;
  CVec w = lu_.solve(rhs);
  w += lu_.solve((rhs - a_ * w).eval());
  if (!w.allFinite())
    throw NumericalError("solve_os: singular operator at lambda = " +
                         std::to_string(prob_.lambda));
  const HelmholtzOperator& h = ws_.helmholtz(prob_.alpha);
  OSSolution s;
  s.w = Field(w, prob_.alpha);
  s.psi = Field(h.S * w, prob_.alpha);
  const CVec dpsi = ws_.d1() * s.psi.values;
  s.u1 = Field(-dpsi, prob_.alpha);
  s.u2 = Field(cplx(0.0, prob_.alpha) * s.psi.values, prob_.alpha);
  const CVec r = (a_ * w - rhs).segment(1, n - 2);
  const double fn = F.values.segment(1, n - 2).norm();
  s.residual = fn > 0 ? r.norm() / fn : r.norm();
  if (prob_.bc == BoundaryCondition::non_slip)
    s.bc_defect = std::max(std::abs(dpsi(0) - top), std::abs(dpsi(n - 1) - bottom));
  else
    s.bc_defect = std::max(std::abs(w(0) - top), std::abs(w(n - 1) - bottom));
  return s;
}

CMat OSOperator::solution_map() const {
  const int n = ws_.n();
  CMat e = CMat::Zero(n, n - 2);
  for (int j = 0; j < n - 2; ++j) e(j + 1, j) = 1.0;
  return lu_.solve(e);
}

OSSolution solve_os(const SpectralWorkspace& ws, const FlowProfile& profile,
                    const OSProblem& prob, const Field& F) {
  return OSOperator(ws, profile, prob).solve(F);
}

namespace {

const std::vector<std::pair<NormPair, std::string>>& pair_names() {
  static const std::vector<std::pair<NormPair, std::string>> names{
      {NormPair::L2_L2w, "L2->L2_w"},     {NormPair::Hm1_L2w, "Hm1->L2_w"},
      {NormPair::Hm1_L2u, "Hm1->L2_u"},   {NormPair::L2_L2u, "L2->L2_u"},
      {NormPair::H1_L2u, "H1->L2_u"},     {NormPair::L2_Linfu, "L2->Linf_u"},
      {NormPair::H1_Linfu, "H1->Linf_u"}, {NormPair::H1_L2w, "H1->L2_w"}};
  return names;
}

}  // namespace

NormPair parse_norm_pair(const std::string& s) {
  for (const auto& [p, name] : pair_names())
    if (name == s) return p;
  throw ConfigError("unknown norm pair: " + s);
}

std::string to_string(NormPair p) {
  for (const auto& [q, name] : pair_names())
    if (q == p) return name;
  return "unknown";
}

const std::vector<NormPair>& all_norm_pairs() {
  static const std::vector<NormPair> all{NormPair::L2_L2w, NormPair::Hm1_L2w, NormPair::Hm1_L2u,
                                         NormPair::L2_L2u, NormPair::H1_L2u, NormPair::L2_Linfu,
                                         NormPair::H1_Linfu, NormPair::H1_L2w};
  return all;
}

ResolventEvaluator::ResolventEvaluator(const SpectralWorkspace& ws, const FlowProfile& profile,
                                       double nu, int alpha, BoundaryCondition bc, cplx o_shift)
    : ws_(ws), profile_(profile), nu_(nu), alpha_(alpha), bc_(bc), o_shift_(o_shift) {
  const HelmholtzOperator& h = ws.helmholtz(alpha);
  const int m = ws.n() - 2;
  const RVec qi = ws.quad().segment(1, m);
  const RMat l = h.gram_llt.matrixL();
  t_l2_ = qi.array().rsqrt().matrix().asDiagonal();
  t_hm1_ = qi.array().inverse().matrix().asDiagonal() * l;
  t_h1_ = l.transpose().triangularView<Eigen::Upper>().solve(RMat::Identity(m, m));
  out_u_ = l.transpose() * h.S.middleRows(1, m);
}

std::vector<double> ResolventEvaluator::evaluate(double lambda,
                                                 const std::vector<NormPair>& pairs) const {
  OSProblem prob{nu_, alpha_, lambda, bc_, o_shift_};
  const OSOperator op(ws_, profile_, prob);
  const CMat M = op.solution_map();
  const HelmholtzOperator& h = ws_.helmholtz(alpha_);

  std::map<int, CMat> inputs;  // 0: L2, 1: Hm1, 2: H1
  auto input = [&](int kind) -> const CMat& {
    auto it = inputs.find(kind);
    if (it != inputs.end()) return it->second;
    CMat mt = kind == 0 ? cmul(M, t_l2_) : kind == 1 ? cmul(M, t_hm1_) : cmul(M, t_h1_);
    return inputs.emplace(kind, std::move(mt)).first->second;
  };
  auto w_out = [&](const CMat& mt) {
    return sigma_max(ws_.sqrt_quad().asDiagonal() * mt);
  };
  auto u_out = [&](const CMat& mt) { return sigma_max(rmul(out_u_, mt)); };
  auto linf_out = [&](const CMat& mt) {
    return max_row_norm(ws_.grid(), rmul(h.DS, mt), rmul(h.S, mt), alpha_);
  };

  std::vector<double> out;
  out.reserve(pairs.size());
  for (NormPair p : pairs) {
    switch (p) {
      case NormPair::L2_L2w: out.push_back(w_out(input(0))); break;
      case NormPair::Hm1_L2w: out.push_back(w_out(input(1))); break;
      case NormPair::H1_L2w: out.push_back(w_out(input(2))); break;
      case NormPair::L2_L2u: out.push_back(u_out(input(0))); break;
      case NormPair::Hm1_L2u: out.push_back(u_out(input(1))); break;
      case NormPair::H1_L2u: out.push_back(u_out(input(2))); break;
      case NormPair::L2_Linfu: out.push_back(linf_out(input(0))); break;
      case NormPair::H1_Linfu: out.push_back(linf_out(input(2))); break;
    }
  }
  return out;
}

double resolvent_norm(const SpectralWorkspace& ws, const FlowProfile& profile,
                      const OSProblem& prob, NormPair pair) {
  return ResolventEvaluator(ws, profile, prob.nu, prob.alpha, prob.bc, prob.o_shift)
      .evaluate(prob.lambda, {pair})[0];
}

std::vector<double> initial_lambda_grid(const FlowProfile& profile, double nu, int alpha,
                                        int points) {
  const double u0 = profile.u_min(), u1 = profile.u_max();
  const double lo = u0 - 1.0, hi = u1 + 1.0;
  std::vector<double> g;
  for (int i = 0; i < points; ++i)
    g.push_back(points > 1 ? lo + (hi - lo) * i / (points - 1) : 0.5 * (lo + hi));
  const double s0 = std::sqrt(nu / alpha);
  const double s1 = std::cbrt(nu / alpha);
  for (double extra : {u0 - s0, u0, u0 + s0, u1 - s1, u1}) g.push_back(extra);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

ResolventScan scan_lambda(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                          int alpha, BoundaryCondition bc, const std::vector<NormPair>& pairs,
                          const ScanOptions& opts) {
  ResolventScan scan;
  scan.problem = OSProblem{nu, alpha, 0.0, bc, opts.o_shift};
  scan.pairs = pairs;
  const std::size_t np = pairs.size();
  scan.sup_norm.assign(np, 0.0);
  scan.argmax_lambda.assign(np, 0.0);
  scan.last_change.assign(np, 0.0);
  if (np == 0) return scan;

  const ResolventEvaluator eval(ws, profile, nu, alpha, bc, opts.o_shift);
  std::map<double, std::vector<double>> values;
  auto run = [&](std::vector<double> lams) {
    std::sort(lams.begin(), lams.end());
    lams.erase(std::unique(lams.begin(), lams.end()), lams.end());
    std::vector<double> todo;
    for (double l : lams)
      if (!values.count(l)) todo.push_back(l);
    std::vector<std::vector<double>> res(todo.size());
    parallel_for(static_cast<int>(todo.size()), opts.threads,
                 [&](int i) { res[i] = eval.evaluate(todo[i], pairs); });
    for (std::size_t i = 0; i < todo.size(); ++i) values.emplace(todo[i], std::move(res[i]));
    scan.evaluations += static_cast<int>(todo.size());
  };
  auto best = [&](std::size_t p) {
    double v = -1.0, arg = 0.0;
    for (const auto& [l, vals] : values)
      if (vals[p] > v) {
        v = vals[p];
        arg = l;
      }
    return std::pair{v, arg};
  };

  const std::vector<double> grid = initial_lambda_grid(profile, nu, alpha, opts.points);
  run(grid);
  const double u0 = profile.u_min(), u1 = profile.u_max();
  const std::vector<double> tail{u0 - 2.0, u0 - 4.0, u0 - 10.0, u1 + 2.0, u1 + 4.0, u1 + 10.0};
  run(tail);
  for (std::size_t p = 0; p < np; ++p) {
    const auto v = [&](double l) { return values.at(l)[p]; };
    const bool left = v(u0 - 1.0) >= v(u0 - 2.0) && v(u0 - 2.0) >= v(u0 - 4.0) &&
                      v(u0 - 4.0) >= v(u0 - 10.0);
    const bool right = v(u1 + 1.0) >= v(u1 + 2.0) && v(u1 + 2.0) >= v(u1 + 4.0) &&
                       v(u1 + 4.0) >= v(u1 + 10.0);
    scan.tail_decreasing = scan.tail_decreasing && left && right;
  }

  const double h0 = 0.5 * (u1 - u0 + 2.0) / std::max(1, opts.points - 1);
  std::vector<double> step(np, h0);
  std::vector<bool> done(np, false);
  for (int round = 0; round < opts.max_refinements; ++round) {
    std::vector<double> lams;
    std::vector<double> before(np);
    for (std::size_t p = 0; p < np; ++p) {
      const auto [v, arg] = best(p);
      before[p] = v;
      if (done[p]) continue;
      lams.push_back(arg - step[p]);
      lams.push_back(arg + step[p]);
    }
    if (lams.empty()) break;
    run(lams);
    for (std::size_t p = 0; p < np; ++p) {
      if (done[p]) continue;
      const double after = best(p).first;
      scan.last_change[p] = before[p] > 0 ? (after - before[p]) / before[p] : 0.0;
      step[p] *= 0.5;
      if (round >= 2 && scan.last_change[p] < opts.refine_tol) done[p] = true;
    }
  }

  for (const auto& [l, vals] : values) {
    scan.lambda_grid.push_back(l);
    scan.norms.push_back(vals);
  }
  for (std::size_t p = 0; p < np; ++p) std::tie(scan.sup_norm[p], scan.argmax_lambda[p]) = best(p);
  return scan;
}

double paper_exponent(BoundaryCondition bc, NormPair pair) {
  if (bc == BoundaryCondition::non_slip) {
    switch (pair) {
      case NormPair::L2_L2w: return 5.0 / 8.0;
      case NormPair::L2_L2u: return 1.0 / 4.0;
      case NormPair::L2_Linfu: return 3.0 / 8.0;
      case NormPair::Hm1_L2w: return 3.0 / 4.0;
      case NormPair::Hm1_L2u: return 1.0 / 2.0;
      case NormPair::H1_L2u: return 0.0;
      case NormPair::H1_L2w: return 3.0 / 8.0;
      default: break;
    }
  } else {
    switch (pair) {
      case NormPair::L2_L2w: return 1.0 / 2.0;
      case NormPair::Hm1_L2w: return 3.0 / 4.0;
      case NormPair::Hm1_L2u: return 1.0 / 2.0;
      case NormPair::L2_L2u: return 1.0 / 4.0;
      case NormPair::H1_L2u: return 0.0;
      default: break;
    }
  }
  throw PreconditionError("paper_exponent: no exponent for " + to_string(pair) + " with " +
                          to_string(bc));
}

ScalingFit fit_scaling(const std::vector<ResolventScan>& scans, std::size_t pair_index) {
  std::vector<double> nus, vals;
  for (const auto& s : scans) {
    nus.push_back(s.problem.nu);
    vals.push_back(s.sup_norm.at(pair_index));
  }
  return fit_power_law(nus, vals);
}

std::vector<EstimateCheck> check_energy_estimates(const SpectralWorkspace& ws,
                                                  const FlowProfile& profile,
                                                  const OSProblem& prob, const Field& F) {
  if (prob.bc != BoundaryCondition::navier_slip)
    throw PreconditionError("check_energy_estimates: needs a Navier-slip problem");
  const OSSolution s = solve_os(ws, profile, prob, F);
  const auto prof = ws.sample(profile);
  const double nu = prob.nu, a = prob.alpha, lam = prob.lambda;
  const double wn = l2_norm(ws, s.w.values);
  const double dwn = l2_norm(ws, ws.d1() * s.w.values);
  const double gw = std::sqrt(dwn * dwn + a * a * wn * wn);
  const CVec wu = (s.w.values.array() / prof.d2u.array().cast<cplx>()).matrix();
  const cplx pairing = inner(ws, F.values, wu);
  const double fl2 = l2_norm(ws, F.values);
  const double fhm1 = norm(ws, Field(F.values, prob.alpha), NormKind::H1_dual);
  const std::map<std::string, double> p{{"nu", nu}, {"alpha", a}, {"lambda", lam}};
  std::vector<EstimateCheck> out;
  out.push_back(make_check("lemma3.1.energy", nu * dwn * dwn + nu * a * a * wn * wn,
                           nu * wn * wn + std::abs(pairing.real()), ws.n(), p));
  out.push_back(make_check("lemma3.1.L2", a * gw, wn + fl2 / nu, ws.n(), p));
  out.push_back(make_check("lemma3.1.Hm1", gw, wn + fhm1 / nu, ws.n(), p));
  const double u0 = profile.u_min(), u1 = profile.u_max();
  if (lam <= u0 + std::sqrt(nu / a))
    out.push_back(make_check("lemma3.1.below",
                             a * std::abs(lam - u0) * wn * wn + 2.0 * std::sqrt(nu * a) * wn * wn,
                             std::abs(pairing), ws.n(), p));
  else
    out.push_back(skipped_check("lemma3.1.below", "lambda above U(0)+nu^{1/2}alpha^{-1/2}", p));
  if (lam >= u1 - std::cbrt(nu / a))
    out.push_back(make_check("lemma3.1.above",
                             a * std::abs(lam - u1) * wn * wn +
                                 2.0 * std::cbrt(nu) * std::pow(a, 2.0 / 3.0) * wn * wn,
                             std::abs(pairing), ws.n(), p));
  else
    out.push_back(skipped_check("lemma3.1.above", "lambda below U(1)-nu^{1/3}alpha^{-1/3}", p));
  for (auto& c : out) c.params["residual"] = s.residual;
  return out;
}

EstimateCheck check_weak_type(const SpectralWorkspace& ws, const FlowProfile& profile,
                              const OSProblem& prob, const Field& F) {
  if (prob.bc != BoundaryCondition::navier_slip)
    throw PreconditionError("check_weak_type: needs a Navier-slip problem");
  const double nu = prob.nu, a = prob.alpha;
  const double u0 = profile.u_min();
  const double delta = std::pow(nu / a, 0.25);
  const double gap = std::sqrt(std::abs(prob.lambda - u0)) + delta;
  const double delta1 = std::pow(delta, 4.0 / 3.0) * std::pow(gap, 2.0 / 3.0);
  const std::map<std::string, double> p{
      {"nu", nu}, {"alpha", a}, {"lambda", prob.lambda}, {"delta1", delta1}};
  if (nu * a * a > gap) return skipped_check("lemma3.7.weak", "nu alpha^2 restriction violated", p);
  const OSSolution s = solve_os(ws, profile, prob, F);
  const auto prof = ws.sample(profile);
  Field f((prof.d2u.array().cast<cplx>() * s.psi.values.array()).matrix(), prob.alpha);
  f.values(0) = 0.0;
  f.values(ws.n() - 1) = 0.0;
  const RayleighSolution r = solve_ray_delta(ws, profile, prob.alpha, prob.lambda, delta1, f);
  const double lhs = std::abs(inner(ws, s.w.values, s.psi.values));
  const double rhs = l2_norm(ws, F.values) / a *
                     (l2_norm(ws, r.w.values) + std::sqrt(nu / a) / std::sqrt(delta1) *
                                                    l2_norm(ws, ws.d1() * r.w.values));
  return make_check("lemma3.7.weak", lhs, rhs, ws.n(), p);
}

}  // namespace shearstab
