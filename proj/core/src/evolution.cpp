#include "shearstab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <sstream>

#include "shearstab/random_field.hpp"

namespace shearstab {
namespace {

/// Linear operator A with d_t w = -A w + F.
CMat linear_operator(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                     int alpha, bool diffusion_only) {
  const int n = ws.n();
  const double a2 = double(alpha) * alpha;
  CMat a = (-nu * (ws.d2() - a2 * RMat::Identity(n, n))).cast<cplx>();
  if (!diffusion_only) {
    const auto s = ws.sample(profile);
    const HelmholtzOperator& h = ws.helmholtz(alpha);
    const cplx ia(0.0, alpha);
    for (int i = 0; i < n; ++i) {
      a(i, i) += ia * s.u(i);
      a.row(i) -= ia * s.d2u(i) * h.S.row(i).cast<cplx>();
    }
  }
  return a;
}

CVec forcing_at(const SpectralWorkspace& ws, const Forcing& f, int alpha, double t,
                double* l2sq) {
  const int n = ws.n();
  CVec out = CVec::Zero(n);
  double sq = 0.0;
  if (f.f1) {
    const CVec v = f.f1(t, ws.nodes());
    out += cplx(0.0, alpha) * v;
    sq += std::pow(l2_norm(ws, v), 2);
  }
  if (f.f2) {
    const CVec v = f.f2(t, ws.nodes());
    out += ws.d1() * v;
    sq += std::pow(l2_norm(ws, v), 2);
  }
  if (l2sq) *l2sq = sq;
  return out;
}

struct Snapshot {
  double omega_l2, u_l2sq, u_linf, dy_phi, alpha_phi, center, dy_omega_sq, weighted_sq;
  CVec psi, dpsi;
};

Snapshot measure(const SpectralWorkspace& ws, int alpha, const CVec& w, int center_idx,
                 const RVec& wall_weight) {
  const HelmholtzOperator& h = ws.helmholtz(alpha);
  Snapshot s;
  s.psi = h.S.cast<cplx>() * w;
  s.dpsi = ws.d1() * s.psi;
  const double a = alpha;
  const auto& q = ws.quad().array();
  s.omega_l2 = l2_norm(ws, w);
  s.dy_phi = l2_norm(ws, s.dpsi);
  s.alpha_phi = a * l2_norm(ws, s.psi);
  s.u_l2sq = s.dy_phi * s.dy_phi + s.alpha_phi * s.alpha_phi;
  s.u_linf = std::sqrt((s.dpsi.array().abs2() + a * a * s.psi.array().abs2()).maxCoeff());
  s.center = center_idx >= 0 ? std::abs(w(center_idx))
                             : std::abs(ws.grid().interpolate(w, 0.0));
  const CVec dw = ws.d1() * w;
  s.dy_omega_sq = (q * dw.array().abs2()).sum();
  s.weighted_sq = (q * wall_weight.array() * w.array().abs2()).sum();
  return s;
}

/// Power-law exponent of the upper envelope of ys against t on [t_lo, t_hi].
RateFit envelope_exponent(const std::vector<double>& t, const std::vector<double>& ys,
                          double t_lo, double t_hi) {
  std::vector<double> lt, ly;
  double env = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = t.size(); i-- > 0;) {
    if (t[i] > t_hi) continue;
    if (t[i] < t_lo) break;
    env = std::max(env, ys[i]);
    pts.emplace_back(t[i], env);
  }
  for (const auto& [ti, e] : pts) {
    if (e <= 0.0) continue;
    lt.push_back(std::log(ti));
    ly.push_back(std::log(e));
  }
  RateFit r;
  r.t_lo = t_lo;
  r.t_hi = t_hi;
  if (lt.size() < 3) return r;
  const LineFit f = fit_line(lt, ly);
  r.rate = f.slope;
  r.r2 = f.r2;
  return r;
}

EvolutionRun integrate(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                       int alpha, const Field& omega_in, const Forcing& forcing,
                       const EvolutionOptions& opts, bool inviscid, double tail_tol,
                       double* t_resolved) {
  const int n = ws.n();
  if (omega_in.size() != n) throw PreconditionError("evolution: data size mismatch");
  if (alpha < 1) throw PreconditionError("evolution: alpha must be >= 1");
  if (!(opts.dt > 0.0) || !(opts.t_final >= 0.0))
    throw PreconditionError("evolution: need dt > 0 and t_final >= 0");
  if (!opts.diffusion_only && opts.dt > dt_max(profile, nu, alpha, n) * (1.0 + 1e-12))
    throw PreconditionError("evolution: dt exceeds dt_max = " +
                            std::to_string(dt_max(profile, nu, alpha, n)));

  EvolutionRun run;
  run.nu = nu;
  run.alpha = alpha;
  run.n = n;
  run.dt = opts.dt;
  run.t_final = opts.t_final;
  run.eps_weight = opts.eps_weight;
  run.bc = opts.diffusion_only ? BoundaryCondition::navier_slip : opts.bc;

  CVec w = omega_in.values;
  if (!inviscid && opts.project && run.bc == BoundaryCondition::non_slip && !opts.diffusion_only) {
    const Field p = project_compatible(ws, omega_in, &run.projection_change);
    w = p.values;
  }
  if (opts.diffusion_only) {
    w(0) = 0.0;
    w(n - 1) = 0.0;
  }
  run.data_h4 = norm(ws, Field(w, alpha), NormKind::Hk_alpha, 4);

  const ModeStepper st(ws, profile, nu, alpha, opts.dt, run.bc, opts.diffusion_only, inviscid);
  // Implicit Euler quarter steps for the first step damp the stiff modes that
  // Crank-Nicolson only reflects.
  const bool startup = !inviscid;
  std::optional<ModeStepper> st0;
  if (startup)
    st0.emplace(ws, profile, nu, alpha, opts.dt / kStartupSteps, run.bc, opts.diffusion_only,
                inviscid, 1.0);
  const auto samples = ws.sample(profile);
  const cplx ia(0.0, alpha);

  int center_idx = -1;
  if (n % 2 == 1) center_idx = n / 2;
  RVec wall_weight = (1.0 - ws.nodes().array().square()).max(0.0).matrix();

  const double growth = opts.eps_weight * std::sqrt(nu);
  const long steps = std::lround(std::ceil(opts.t_final / opts.dt - 1e-9));
  double fsq0 = 0.0;
  CVec f_now = forcing.active() ? forcing_at(ws, forcing, alpha, 0.0, &fsq0) : CVec::Zero(n);

  double u_linf_l2 = 0.0, u_l2l2 = 0.0, u_linf_linf = 0.0, w_l2l2 = 0.0, w_linf_l2 = 0.0,
         dw_l2l2 = 0.0, ww_linf = 0.0, f_l2 = 0.0;
  Snapshot prev = measure(ws, alpha, w, center_idx, wall_weight);
  // Blow-up reference: the data norm plus the accumulated forcing.
  double w0 = std::max(prev.omega_l2, 1e-300);
  auto accumulate_sup = [&](const Snapshot& s, double t) {
    const double e2 = std::exp(2.0 * growth * t);
    u_linf_l2 = std::max(u_linf_l2, e2 * s.u_l2sq);
    u_linf_linf = std::max(u_linf_linf, e2 * s.u_linf * s.u_linf);
    w_linf_l2 = std::max(w_linf_l2, e2 * s.omega_l2 * s.omega_l2);
    ww_linf = std::max(ww_linf, e2 * s.weighted_sq);
  };
  auto record = [&](const Snapshot& s, double t, double resid) {
    run.series.t.push_back(t);
    run.series.omega_l2.push_back(s.omega_l2);
    run.series.u_l2.push_back(std::sqrt(s.u_l2sq));
    run.series.u_linf.push_back(s.u_linf);
    run.series.dy_phi.push_back(s.dy_phi);
    run.series.alpha_phi.push_back(s.alpha_phi);
    run.series.omega_center.push_back(s.center);
    run.series.energy_residual.push_back(resid);
  };
  accumulate_sup(prev, 0.0);
  record(prev, 0.0, 0.0);
  if (t_resolved) *t_resolved = opts.t_final;
  if (!opts.checkpoint_dir.empty()) std::filesystem::create_directories(opts.checkpoint_dir);

  for (long k = 0; k < steps; ++k) {
    const double t0 = k * opts.dt;
    const double t1 = (k + 1) * opts.dt;
    double fsq1 = 0.0;
    CVec f_next = forcing.active() ? forcing_at(ws, forcing, alpha, t1, &fsq1) : CVec::Zero(n);
    if (forcing.active()) w0 += 0.5 * opts.dt * (l2_norm(ws, f_now) + l2_norm(ws, f_next));
    CVec w1;
    if (k == 0 && startup) {
      w1 = w;
      const double h = opts.dt / kStartupSteps;
      for (int j = 1; j <= kStartupSteps; ++j) {
        CVec g = CVec::Zero(n);
        if (forcing.active())
          g = h * (j == kStartupSteps ? f_next
                                      : forcing_at(ws, forcing, alpha, t0 + j * h, nullptr));
        w1 = st0->step(w1, std::move(g));
      }
    } else {
      CVec g = CVec::Zero(n);
      if (forcing.active()) g = 0.5 * opts.dt * (f_now + f_next);
      w1 = st.step(w, std::move(g));
    }
    if (!w1.allFinite())
      throw NumericalError("evolution: non-finite state at t = " + std::to_string(t1));

    const Snapshot cur = measure(ws, alpha, w1, center_idx, wall_weight);
    if (cur.omega_l2 > opts.blowup_factor * w0)
      throw NumericalError("evolution: norm growth beyond " +
                           std::to_string(opts.blowup_factor) + "x at t = " +
                           std::to_string(t1) + " (dt = " + std::to_string(opts.dt) +
                           ", n = " + std::to_string(n) + ", nu = " + std::to_string(nu) + ")");

    // Trapezoid in time for the L2_t functionals.
    const double e0 = std::exp(2.0 * growth * t0);
    const double e1 = std::exp(2.0 * growth * t1);
    const double h2 = 0.5 * opts.dt;
    u_l2l2 += h2 * (e0 * prev.u_l2sq + e1 * cur.u_l2sq);
    w_l2l2 += h2 * (e0 * prev.omega_l2 * prev.omega_l2 + e1 * cur.omega_l2 * cur.omega_l2);
    dw_l2l2 += h2 * (e0 * prev.dy_omega_sq + e1 * cur.dy_omega_sq);
    f_l2 += h2 * (e0 * fsq0 + e1 * fsq1);
    accumulate_sup(cur, t1);

    // Energy identity at the midpoint: d/dt ||u||^2 = -2 nu ||w||^2
    //   + 2 Re(-i alpha int U' psi' conj(psi)) - 2 Re <F, psi>.
    const CVec wm = 0.5 * (w + w1);
    const CVec psim = 0.5 * (prev.psi + cur.psi);
    const CVec dpsim = 0.5 * (prev.dpsi + cur.dpsi);
    const double lhs_e = (cur.u_l2sq - prev.u_l2sq) / opts.dt;
    double flux = 0.0;
    if (!opts.diffusion_only) {
      cplx acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += ws.quad()(i) * samples.du(i) * dpsim(i) * std::conj(psim(i));
      flux = 2.0 * (-ia * acc).real();
    }
    const double diss = -2.0 * nu * std::pow(l2_norm(ws, wm), 2);
    double force = 0.0;
    if (forcing.active()) force = -2.0 * inner(ws, 0.5 * (f_now + f_next), psim).real();
    const double scale = std::abs(diss) + std::abs(flux) + std::abs(force) + std::abs(lhs_e);
    const double resid = scale > 0 ? std::abs(lhs_e - (diss + flux + force)) / scale : 0.0;
    // The midpoint identity holds for the Crank-Nicolson steps only.
    if (!(k == 0 && startup))
      run.max_energy_residual = std::max(run.max_energy_residual, resid);

    if (!inviscid && run.bc == BoundaryCondition::non_slip) {
      const double pn = std::max(l2_norm(ws, cur.psi), 1e-300);
      const double defect = std::max(std::abs(cur.dpsi(0)), std::abs(cur.dpsi(n - 1))) / pn;
      run.max_bc_defect = std::max(run.max_bc_defect, defect);
    }
    if ((k + 1) % std::max(1, opts.record_stride) == 0 || k + 1 == steps) record(cur, t1, resid);
    if (!opts.checkpoint_dir.empty() && opts.checkpoint_every > 0 &&
        (k + 1) % opts.checkpoint_every == 0) {
      std::ostringstream name;
      name << opts.checkpoint_dir << "/checkpoint_" << (k + 1) << ".bin";
      write_checkpoint(name.str(), run, t1, w1);
    }
    if (tail_tol > 0.0 && (k + 1) % 25 == 0 && spectral_tail(ws, w1) > tail_tol) {
      if (t_resolved) *t_resolved = t1;
      w = w1;
      break;
    }
    w = std::move(w1);
    prev = cur;
    f_now = std::move(f_next);
    fsq0 = fsq1;
  }

  const double al = alpha;
  auto& fn = run.functionals;
  fn["u_LinfL2"] = al * u_linf_l2;
  fn["u_L2L2"] = al * u_l2l2;
  fn["u_LinfLinf"] = u_linf_linf;
  fn["omega_L2L2"] = std::sqrt(nu) * std::sqrt(al) * w_l2l2;
  fn["omega_LinfL2"] = std::sqrt(nu) * w_linf_l2;
  fn["dy_omega_L2L2"] = std::pow(nu, 1.5) * dw_l2l2;
  fn["weighted_omega_LinfL2"] = ww_linf;
  fn["u_L2L2_raw"] = u_l2l2;
  fn["omega_L2L2_raw"] = w_l2l2;
  run.forcing_l2 = f_l2;
  run.omega_final = Field(w, alpha);
  return run;
}

}  // namespace

double dt_max(const FlowProfile& profile, double, int alpha, int) {
  const double umax = std::max(std::abs(profile.u_min()), std::abs(profile.u_max()));
  if (umax <= 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 / (alpha * umax);
}

ModeStepper::ModeStepper(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                         int alpha, double dt, BoundaryCondition bc, bool diffusion_only,
                         bool inviscid, double theta)
    : constrained_(!inviscid), dt_(dt) {
  const int n = ws.n();
  const CMat a = linear_operator(ws, profile, nu, alpha, diffusion_only);
  CMat lhs = CMat::Identity(n, n) + theta * dt * a;
  rhs_ = CMat::Identity(n, n) - (1.0 - theta) * dt * a;
  if (constrained_) {
    rhs_.row(0).setZero();
    rhs_.row(n - 1).setZero();
    if (bc == BoundaryCondition::non_slip && !diffusion_only) {
      // The wall values act as multipliers for psi'(+-1) = 0: implicit only.
      for (int c : {0, n - 1}) {
        lhs.col(c) += (1.0 - theta) * dt * a.col(c);
        rhs_.col(c).setZero();
      }
      const HelmholtzOperator& h = ws.helmholtz(alpha);
      lhs.row(0) = h.DS.row(0).cast<cplx>();
      lhs.row(n - 1) = h.DS.row(n - 1).cast<cplx>();
    } else {
      lhs.row(0).setZero();
      lhs.row(n - 1).setZero();
      lhs(0, 0) = 1.0;
      lhs(n - 1, n - 1) = 1.0;
    }
  }
  lhs_.compute(lhs);
}

CVec ModeStepper::step(const CVec& w, CVec g) const {
  if (constrained_ && g.size() > 0) {
    g(0) = 0.0;
    g(g.size() - 1) = 0.0;
  }
  CVec rhs = rhs_ * w;
  if (g.size() > 0) rhs += g;
  return lhs_.solve(rhs);
}

Field project_compatible(const SpectralWorkspace& ws, const Field& w, double* change) {
  const int n = ws.n();
  const double a = w.alpha;
  CVec e1(n), e2(n);
  for (int i = 0; i < n; ++i) {
    e1(i) = std::exp(a * ws.nodes()(i));
    e2(i) = std::exp(-a * ws.nodes()(i));
  }
  e1 /= l2_norm(ws, e1);
  e2 -= inner(ws, e2, e1) * e1;
  e2 /= l2_norm(ws, e2);
  CVec v = w.values;
  v -= inner(ws, v, e1) * e1;
  v -= inner(ws, v, e2) * e2;
  if (change) {
    const double base = l2_norm(ws, w.values);
    *change = base > 0 ? l2_norm(ws, v - w.values) / base : 0.0;
  }
  return Field(v, w.alpha);
}

Field seeded_data(const SpectralWorkspace& ws, int alpha, std::uint64_t seed, bool project) {
  Field f = random_field(ws, alpha, seed, 2);
  if (project) f = project_compatible(ws, f);
  const double h4 = norm(ws, f, NormKind::Hk_alpha, 4);
  if (h4 > 0) f.values /= h4;
  return f;
}

EvolutionRun run_linear(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                        int alpha, const Field& omega_in, const Forcing& forcing,
                        const EvolutionOptions& opts) {
  if (!(nu > 0.0)) throw PreconditionError("run_linear: nu must be positive");
  return integrate(ws, profile, nu, alpha, omega_in, forcing, opts, false, 0.0, nullptr);
}

RateFit decay_rate(const EvolutionRun& run) {
  RateFit r;
  r.t_lo = 1.0 / std::sqrt(run.nu);
  r.t_hi = 5.0 / std::sqrt(run.nu);
  if (r.t_hi > run.t_final * (1.0 + 1e-12))
    throw PreconditionError("decay_rate: fit window exceeds t_final");
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < run.series.t.size(); ++i) {
    const double t = run.series.t[i];
    if (t < r.t_lo || t > r.t_hi || run.series.omega_l2[i] <= 0.0) continue;
    ts.push_back(t);
    ls.push_back(std::log(run.series.omega_l2[i]));
  }
  if (ts.size() < 3) throw PreconditionError("decay_rate: too few samples in window");
  const LineFit f = fit_line(ts, ls);
  r.rate = -f.slope;
  r.r2 = f.r2;
  return r;
}

EnhancedDissipation measure_enhanced_dissipation(const std::vector<EvolutionRun>& runs) {
  EnhancedDissipation out;
  std::vector<double> nus, rates;
  for (const auto& run : runs) {
    out.fits.push_back(decay_rate(run));
    nus.push_back(run.nu);
    rates.push_back(out.fits.back().rate);
  }
  bool positive = std::all_of(rates.begin(), rates.end(), [](double r) { return r > 0.0; });
  if (runs.size() >= 2 && positive) {
    out.exponent_vs_nu = fit_power_law(nus, rates);
  } else {
    out.exponent_vs_nu.nus = nus;
    out.exponent_vs_nu.values = rates;
    out.exponent_vs_nu.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

EulerRun run_euler(const SpectralWorkspace& ws, const FlowProfile& profile, int alpha,
                   const Field& omega_in, const EulerOptions& opts) {
  if (opts.t_final > 200.0) throw PreconditionError("run_euler: t_final must be <= 200");
  EvolutionOptions eo;
  eo.dt = opts.dt;
  eo.t_final = opts.t_final;
  eo.eps_weight = 0.0;
  eo.project = false;
  eo.record_stride = opts.record_stride;
  EulerRun out;
  out.run = integrate(ws, profile, 0.0, alpha, omega_in, Forcing{}, eo, true,
                      opts.tail_tolerance, &out.t_resolved);
  out.truncated = out.t_resolved < opts.t_final - 1e-9;
  const auto& s = out.run.series;
  out.dy_phi = envelope_exponent(s.t, s.dy_phi, opts.fit_start, out.t_resolved);
  out.alpha_phi = envelope_exponent(s.t, s.alpha_phi, opts.fit_start, out.t_resolved);
  out.omega_center = envelope_exponent(s.t, s.omega_center, opts.fit_start, out.t_resolved);
  const double h1 = norm(ws, omega_in, NormKind::Hk_alpha, 1);
  const double wmax = *std::max_element(s.omega_l2.begin(), s.omega_l2.end());
  out.omega_bound_ratio = h1 > 0 ? wmax / h1 : 0.0;
  return out;
}

EulerRun run_euler(const FlowProfile& profile, int n, int alpha, std::uint64_t seed,
                   const EulerOptions& opts) {
  for (;;) {
    SpectralWorkspace ws(n);
    const Field data = seeded_data(ws, alpha, seed, false);
    EulerRun r = run_euler(ws, profile, alpha, data, opts);
    if (!r.truncated || n >= opts.n_max) return r;
    n = std::min(opts.n_max, (n * 3) / 2);
  }
}

EstimateCheck verify_spacetime_bound(const EvolutionRun& run) {
  static const char* names[] = {"u_LinfL2",     "u_L2L2",       "u_LinfLinf",
                                "omega_L2L2",   "omega_LinfL2", "dy_omega_L2L2",
                                "weighted_omega_LinfL2"};
  double lhs = 0.0;
  for (const char* k : names) {
    auto it = run.functionals.find(k);
    if (it != run.functionals.end()) lhs += it->second;
  }
  double rhs = run.data_h4 * run.data_h4;
  if (run.nu > 0) rhs += run.forcing_l2 / run.nu;
  return make_check("theorem1.1.spacetime", lhs, rhs, run.n,
                    {{"nu", run.nu}, {"alpha", double(run.alpha)}, {"t_final", run.t_final},
                     {"eps", run.eps_weight}});
}

void write_checkpoint(const std::string& path, const EvolutionRun& run, double t,
                      const CVec& omega) {
  nlohmann::json header{{"n", omega.size()}, {"alpha", run.alpha}, {"nu", run.nu},
                        {"dt", run.dt},      {"t", t}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("write_checkpoint: cannot open " + path);
  out << header.dump() << '\n';
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    const double re = omega(i).real();
    const double im = omega(i).imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof re);
    out.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
}

CVec read_checkpoint(const std::string& path, std::string* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericalError("read_checkpoint: cannot open " + path);
  std::string line;
  std::getline(in, line);
  const auto h = nlohmann::json::parse(line);
  const int n = h.at("n").get<int>();
  CVec v(n);
  for (int i = 0; i < n; ++i) {
    double re = 0.0, im = 0.0;
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    v(i) = cplx(re, im);
  }
  if (!in) throw NumericalError("read_checkpoint: truncated file " + path);
  if (header) *header = line;
  return v;
}

double spectral_tail(const SpectralWorkspace& ws, const CVec& f) {
  const int n = ws.n();
  const int m = n - 1;
  CVec c = CVec::Zero(n);
  for (int k = 0; k <= m; ++k) {
    cplx s = 0.0;
    for (int j = 0; j <= m; ++j) {
      const double wj = (j == 0 || j == m) ? 0.5 : 1.0;
      s += wj * f(j) * std::cos(pi * double(k) * j / m);
    }
    c(k) = s * ((k == 0 || k == m) ? 1.0 / m : 2.0 / m);
  }
  const int tail = std::max(1, n / 8);
  const double total = c.norm();
  return total > 0 ? c.tail(tail).norm() / total : 0.0;
}

}  // namespace shearstab
