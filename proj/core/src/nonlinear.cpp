#include "shearstab/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "shearstab/parallel.hpp"
#include "shearstab/random_field.hpp"

namespace shearstab {
namespace {

struct BlowUp {
  double t;
};

/// Velocity, vorticity and norms of every mode at one time level.
struct Snapshot {
  std::vector<CVec> w, u1, u2;   // index a = 0..K
  std::vector<double> u_sq, w_sq, dw_sq;
  std::vector<CVec> source;      // -(i a f1 + d_y f2) for a >= 1; source[0] for u10
  double omega_nonzero = 0.0;
  double kinetic = 0.0;
};

Snapshot evaluate(const SpectralWorkspace& ws, int K, const CVec& u10,
                  const std::vector<CVec>& omega, bool fluxes) {
  const int n = ws.n();
  Snapshot s;
  s.w.resize(K + 1);
  s.u1.resize(K + 1);
  s.u2.resize(K + 1);
  s.u_sq.assign(K + 1, 0.0);
  s.w_sq.assign(K + 1, 0.0);
  s.dw_sq.assign(K + 1, 0.0);
  const auto q = ws.quad().array();
  s.u1[0] = u10;
  s.u2[0] = CVec::Zero(n);
  s.w[0] = -(ws.d1() * u10);
  s.u_sq[0] = (q * u10.array().abs2()).sum();
  s.w_sq[0] = (q * s.w[0].array().abs2()).sum();
  s.kinetic = 0.5 * s.u_sq[0];
  for (int a = 1; a <= K; ++a) {
    const HelmholtzOperator& h = ws.helmholtz(a);
    const CVec psi = h.S.cast<cplx>() * omega[a];
    const CVec dpsi = ws.d1() * psi;
    s.w[a] = omega[a];
    s.u1[a] = -dpsi;
    s.u2[a] = cplx(0.0, a) * psi;
    s.u_sq[a] = (q * (dpsi.array().abs2() + double(a) * a * psi.array().abs2())).sum();
    s.w_sq[a] = (q * omega[a].array().abs2()).sum();
    const CVec dw = ws.d1() * omega[a];
    s.dw_sq[a] = (q * dw.array().abs2()).sum();
    s.omega_nonzero += 2.0 * std::sqrt(s.w_sq[a]);
    s.kinetic += s.u_sq[a];
  }
  {
    const CVec dw0 = ws.d1() * s.w[0];
    s.dw_sq[0] = (q * dw0.array().abs2()).sum();
  }
  s.source.assign(K + 1, CVec::Zero(n));
  if (!fluxes) return s;

  auto at = [&](const std::vector<CVec>& v, int b) -> CVec {
    return b >= 0 ? v[b] : CVec(v[-b].conjugate());
  };
  // Truncated convolution: output modes 0..K from input pairs inside -K..K.
  for (int g = 0; g <= K; ++g) {
    CVec f1 = CVec::Zero(n);
    CVec f2 = CVec::Zero(n);
    CVec m0 = CVec::Zero(n);
    for (int b = std::max(-K, g - K); b <= std::min(K, g + K); ++b) {
      const CVec wb = at(s.w, g - b);
      if (g > 0) f1.array() += at(s.u1, b).array() * wb.array();
      if (g > 0) f2.array() += at(s.u2, b).array() * wb.array();
      if (g == 0) m0.array() += at(s.u2, b).array() * at(s.u1, -b).array();
    }
    if (g == 0)
      s.source[0] = -(ws.d1() * m0);
    else
      s.source[g] = -(cplx(0.0, g) * f1 + ws.d1() * f2);
  }
  return s;
}

/// Running weighted space-time norms per mode.
struct Ledger {
  std::vector<double> sup_u, int_u, sup_w, int_w, int_dw;

  explicit Ledger(int K)
      : sup_u(K + 1, 0.0), int_u(K + 1, 0.0), sup_w(K + 1, 0.0), int_w(K + 1, 0.0),
        int_dw(K + 1, 0.0) {}

  void sup(const Snapshot& s, double e) {
    for (std::size_t a = 0; a < sup_u.size(); ++a) {
      sup_u[a] = std::max(sup_u[a], e * s.u_sq[a]);
      sup_w[a] = std::max(sup_w[a], e * s.w_sq[a]);
    }
  }

  void integrate(const Snapshot& s0, double e0, const Snapshot& s1, double e1, double h) {
    for (std::size_t a = 0; a < sup_u.size(); ++a) {
      int_u[a] += 0.5 * h * (e0 * s0.u_sq[a] + e1 * s1.u_sq[a]);
      int_w[a] += 0.5 * h * (e0 * s0.w_sq[a] + e1 * s1.w_sq[a]);
      int_dw[a] += 0.5 * h * (e0 * s0.dw_sq[a] + e1 * s1.dw_sq[a]);
    }
  }

  std::vector<double> values(double nu) const {
    std::vector<double> out(sup_u.size());
    const double r = std::sqrt(nu);
    out[0] = std::sqrt(sup_u[0] + nu * int_w[0]);   // -d_y u10 is the zero-mode vorticity
    for (std::size_t a = 1; a < out.size(); ++a) {
      const double al = double(a);
      out[a] = std::sqrt(al * sup_u[a] + al * int_u[a] + r * sup_w[a] +
                         r * std::sqrt(al) * int_w[a] + nu * r * int_dw[a]);
    }
    return out;
  }
};

double total(const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t a = 0; a < v.size(); ++a) s += a == 0 ? v[a] : 2.0 * v[a];
  return s;
}

NonlinearRun attempt(const SpectralWorkspace& ws, const FlowProfile& profile, double nu, int K,
                     const NonlinearData& data, const NonlinearOptions& opts, double dt) {
  const int n = ws.n();
  const bool inviscid = nu == 0.0;
  const bool diffusion_only = !opts.background;
  NonlinearRun run;
  run.nu = nu;
  run.K = K;
  run.n = n;
  run.dt = dt;

  std::vector<ModeStepper> st;
  std::vector<ModeStepper> st0;
  const bool startup = !inviscid;
  st.emplace_back(ws, profile, nu, 0, dt, BoundaryCondition::navier_slip, true, inviscid);
  if (startup)
    st0.emplace_back(ws, profile, nu, 0, dt / kStartupSteps, BoundaryCondition::navier_slip,
                     true, false, 1.0);
  for (int a = 1; a <= K; ++a) {
    st.emplace_back(ws, profile, nu, a, dt, opts.bc, diffusion_only, inviscid);
    if (startup)
      st0.emplace_back(ws, profile, nu, a, dt / kStartupSteps, opts.bc, diffusion_only, false,
                       1.0);
  }

  CVec u10 = data.u10.size() == n ? data.u10 : CVec::Zero(n);
  std::vector<CVec> omega(K + 1, CVec::Zero(n));
  for (int a = 1; a <= K && a - 1 < static_cast<int>(data.omega.size()); ++a)
    omega[a] = data.omega[a - 1];
  if (!inviscid) {
    u10(0) = 0.0;
    u10(n - 1) = 0.0;
  }
  std::vector<CVec> linear = omega;

  const double growth = opts.eps_weight * std::sqrt(nu);
  const long steps = std::lround(std::ceil(opts.t_final / dt - 1e-9));
  Ledger ledger(K);
  Snapshot prev = evaluate(ws, K, u10, omega, opts.nonlinear);
  ledger.sup(prev, 1.0);
  run.energy_initial = total(ledger.values(nu));
  run.omega_initial = prev.omega_nonzero;
  run.omega_max = prev.omega_nonzero;
  double u10_max = u10.cwiseAbs().maxCoeff();
  double im_max = u10.imag().cwiseAbs().maxCoeff();

  auto record = [&](const Snapshot& s, double t) {
    run.series.t.push_back(t);
    run.series.omega_nonzero.push_back(s.omega_nonzero);
    run.series.kinetic_energy.push_back(s.kinetic);
    run.series.energy_sum.push_back(total(ledger.values(nu)));
  };
  record(prev, 0.0);

  std::vector<CVec> source_old;
  CVec u10_old;
  bool transitioned = false;
  double t_end = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double t1 = (k + 1) * dt;
    const CVec u10_prev = u10;
    if (k == 0 && startup) {
      const double h = dt / kStartupSteps;
      for (int j = 0; j < kStartupSteps; ++j) {
        u10 = st0[0].step(u10, h * prev.source[0]);
        for (int a = 1; a <= K; ++a) {
          omega[a] = st0[a].step(omega[a], h * prev.source[a]);
          linear[a] = st0[a].step(linear[a], CVec());
        }
      }
    } else {
      auto g = [&](int a) -> CVec {
        if (source_old.empty()) return dt * prev.source[a];
        return dt * (1.5 * prev.source[a] - 0.5 * source_old[a]);
      };
      u10 = st[0].step(u10, g(0));
      for (int a = 1; a <= K; ++a) {
        omega[a] = st[a].step(omega[a], g(a));
        linear[a] = st[a].step(linear[a], CVec());
      }
    }
    Snapshot cur = evaluate(ws, K, u10, omega, opts.nonlinear);
    bool finite = std::isfinite(cur.omega_nonzero) && u10.allFinite();
    if (!finite || (run.omega_initial > 0.0 &&
                    cur.omega_nonzero > opts.blowup_factor * run.omega_initial))
      throw BlowUp{t1};

    // Midpoint residual of d_t u10 - nu u10'' = source on the interior nodes.
    if (!(k == 0 && startup)) {
      const CVec dudt = (u10 - u10_prev) / dt;
      const CVec diff = nu * (ws.d2() * (0.5 * (u10 + u10_prev)));
      const CVec src = 0.5 * (prev.source[0] + cur.source[0]);
      const CVec r = dudt - diff - src;
      double scale = 0.0, res = 0.0;
      for (int i = 1; i + 1 < n; ++i) {
        scale = std::max({scale, std::abs(dudt(i)), std::abs(diff(i)), std::abs(src(i))});
        res = std::max(res, std::abs(r(i)));
      }
      if (scale > 0.0) run.zero_mode_residual = std::max(run.zero_mode_residual, res / scale);
    }

    const double e0 = std::exp(2.0 * growth * (t1 - dt));
    const double e1 = std::exp(2.0 * growth * t1);
    ledger.integrate(prev, e0, cur, e1, dt);
    ledger.sup(cur, e1);
    run.omega_max = std::max(run.omega_max, cur.omega_nonzero);
    u10_max = std::max(u10_max, u10.cwiseAbs().maxCoeff());
    im_max = std::max(im_max, u10.imag().cwiseAbs().maxCoeff());
    t_end = t1;

    if (run.omega_initial > 0.0 &&
        cur.omega_nonzero > opts.transition_factor * run.omega_initial)
      transitioned = true;
    if ((k + 1) % std::max(1, opts.record_stride) == 0 || k + 1 == steps || transitioned)
      record(cur, t1);
    source_old = std::move(prev.source);
    prev = std::move(cur);
    if (transitioned) break;
  }

  run.final_state.nu = nu;
  run.final_state.time = t_end;
  run.final_state.K = K;
  run.final_state.u10 = u10;
  run.final_state.omega = omega;
  run.final_state.omega[0] = -(ws.d1() * u10);
  run.final_state.energy_ledger = ledger.values(nu);
  run.energy_final = total(run.final_state.energy_ledger);
  run.energy_max = run.energy_final;   // every E_a is nondecreasing in t
  run.reality_defect = u10_max > 0.0 ? im_max / u10_max : 0.0;
  for (int a = 1; a <= K; ++a) {
    run.linear_prediction.push_back(l2_norm(ws, linear[a]));
    run.nonlinear_final.push_back(l2_norm(ws, omega[a]));
  }

  if (transitioned) {
    run.verdict = Verdict::transitioned;
  } else {
    bool ok = run.energy_final <= opts.stable_energy_factor * run.energy_initial;
    const double floor = 1e-14 * run.omega_initial;
    for (int a = 0; a < K; ++a)
      ok = ok && run.nonlinear_final[a] <= opts.linear_factor * run.linear_prediction[a] + floor;
    run.verdict = ok ? Verdict::stable : Verdict::inconclusive;
  }
  return run;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::transitioned: return "transitioned";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CVec NonlinearState::mode(int a) const {
  if (a == 0) return omega.empty() ? CVec() : omega[0];
  if (std::abs(a) > K) throw PreconditionError("NonlinearState::mode: |a| > K");
  return a > 0 ? omega[a] : CVec(omega[-a].conjugate());
}

double data_h4_sum(const SpectralWorkspace& ws, const NonlinearData& data) {
  double s = 0.0;
  if (data.u10.size() == ws.n()) {
    const CVec w0 = -(ws.d1() * data.u10);
    s += norm(ws, Field(w0, 0), NormKind::Hk_alpha, 4);
  }
  for (std::size_t i = 0; i < data.omega.size(); ++i)
    s += 2.0 * norm(ws, Field(data.omega[i], int(i) + 1), NormKind::Hk_alpha, 4);
  return s;
}

NonlinearData seeded_multimode(const SpectralWorkspace& ws, int K, std::uint64_t seed) {
  NonlinearData d;
  d.u10 = CVec::Zero(ws.n());
  for (int a = 1; a <= K; ++a)
    d.omega.push_back(seeded_data(ws, a, mix_seed(seed, std::uint64_t(a)), true).values);
  return d;
}

NonlinearRun run_nonlinear(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                           int K, const NonlinearData& data, double amplitude,
                           const NonlinearOptions& opts) {
  if (K < 1 || K > 16) throw PreconditionError("run_nonlinear: need 1 <= K <= 16");
  if (nu < 0.0) throw PreconditionError("run_nonlinear: nu must be >= 0");
  if (!(amplitude >= 0.0)) throw PreconditionError("run_nonlinear: amplitude must be >= 0");
  if (!(opts.dt > 0.0) || !(opts.t_final >= 0.0))
    throw PreconditionError("run_nonlinear: need dt > 0 and t_final >= 0");
  if (opts.background && opts.dt > dt_max(profile, nu, K, ws.n()) * (1.0 + 1e-12))
    throw PreconditionError("run_nonlinear: dt exceeds dt_max = " +
                            std::to_string(dt_max(profile, nu, K, ws.n())));
  if (nu == 0.0 && opts.background)
    throw PreconditionError("run_nonlinear: nu = 0 requires background = false");

  NonlinearData scaled = data;
  const double h4 = data_h4_sum(ws, data);
  const double factor = h4 > 0.0 ? amplitude / h4 : 0.0;
  if (scaled.u10.size() == ws.n()) scaled.u10 *= factor;
  for (auto& w : scaled.omega) w *= factor;

  double dt = opts.dt;
  NonlinearRun out;
  for (int tries = 0;; ++tries) {
    try {
      out = attempt(ws, profile, nu, K, scaled, opts, dt);
      out.dt_retried = tries > 0;
      break;
    } catch (const BlowUp& b) {
      if (tries < opts.dt_retries) {
        dt *= 0.5;
        continue;
      }
      out = NonlinearRun{};
      out.nu = nu;
      out.K = K;
      out.n = ws.n();
      out.dt = dt;
      out.verdict = Verdict::transitioned;
      out.blowup = true;
      out.final_state.time = b.t;
      out.energy_initial = std::numeric_limits<double>::quiet_NaN();
      out.energy_final = std::numeric_limits<double>::infinity();
      out.energy_max = out.energy_final;
      break;
    }
  }
  out.amplitude = amplitude;
  out.data_h4 = amplitude > 0.0 ? amplitude : 0.0;
  if (!out.blowup) {
    const double e = out.energy_final;
    const double rhs = out.data_h4 + std::pow(nu, -2.0 / 3.0) * e * e;
    out.bootstrap = make_check("theorem1.2.bootstrap", e, nu > 0.0 ? rhs : out.data_h4,
                               ws.n(), {{"nu", nu}, {"K", double(K)}, {"amplitude", amplitude}});
  } else {
    out.bootstrap = skipped_check("theorem1.2.bootstrap", "blow-up",
                                  {{"nu", nu}, {"K", double(K)}, {"amplitude", amplitude}});
  }
  return out;
}

ThresholdTable threshold_sweep(const SpectralWorkspace& ws, const FlowProfile& profile,
                               const std::vector<double>& nus, const std::vector<double>& A,
                               const std::vector<std::uint64_t>& seeds, int K,
                               const NonlinearOptions& opts, int threads) {
  for (double a : A)
    if (!(a > 0.0)) throw PreconditionError("threshold_sweep: amplitudes must be positive");
  ThresholdTable table;
  std::vector<double> As = A;
  std::sort(As.begin(), As.end());
  const int na = static_cast<int>(As.size());
  const int ns = static_cast<int>(seeds.size());
  const int total_cells = static_cast<int>(nus.size()) * na * ns;
  table.rows.resize(total_cells);
  std::vector<EstimateCheck> checks(total_cells);
  std::vector<bool> stable(total_cells, false);
  parallel_for(total_cells, threads, [&](int idx) {
    const int iv = idx / (na * ns);
    const int ia = (idx / ns) % na;
    const int is = idx % ns;
    const double nu = nus[iv];
    const NonlinearData data = seeded_multimode(ws, K, seeds[is]);
    const double amp = As[ia] * std::pow(nu, 2.0 / 3.0);
    const NonlinearRun r = run_nonlinear(ws, profile, nu, K, data, amp, opts);
    ThresholdRow& row = table.rows[idx];
    row.nu = nu;
    row.A = As[ia];
    row.amplitude = amp;
    row.seed = seeds[is];
    row.verdict = r.verdict;
    row.blowup = r.blowup;
    row.final_E = r.energy_final;
    row.max_E = r.energy_max;
    checks[idx] = r.bootstrap;
    stable[idx] = r.verdict == Verdict::stable;
  });
  for (int i = 0; i < total_cells; ++i)
    if (stable[i]) table.bootstrap.push_back(checks[i]);

  table.cells = total_cells;
  std::vector<double> fit_nu, fit_A;
  for (std::size_t iv = 0; iv < nus.size(); ++iv) {
    for (int is = 0; is < ns; ++is) {
      bool seen = false;
      for (int ia = 0; ia < na; ++ia) {
        const Verdict v = table.rows[(iv * na + ia) * ns + is].verdict;
        if (v == Verdict::transitioned) seen = true;
        else if (seen && v == Verdict::stable) ++table.violations;
      }
    }
    ThresholdColumn col;
    col.nu = nus[iv];
    col.A_star = std::numeric_limits<double>::quiet_NaN();
    int first = -1, transitioned_cells = 0;
    for (int ia = 0; ia < na; ++ia) {
      int count = 0;
      for (int is = 0; is < ns; ++is)
        if (table.rows[(iv * na + ia) * ns + is].verdict == Verdict::transitioned) ++count;
      transitioned_cells += count;
      if (first < 0 && ns > 0 && 2 * count > ns) first = ia;
    }
    if (first >= 0) {
      col.A_star = As[first];
      fit_nu.push_back(nus[iv]);
      fit_A.push_back(As[first]);
    }
    if (transitioned_cells == 0) col.status = "all_stable";
    else if (transitioned_cells == na * ns) col.status = "all_transitioned";
    else col.status = first >= 0 ? "ok" : "minority_transitioned";
    table.columns.push_back(col);
  }
  if (fit_nu.size() >= 2) table.fit = fit_power_law(fit_nu, fit_A);
  return table;
}

double heat_oracle_error(const SpectralWorkspace& ws, const FlowProfile& profile, double nu,
                         double t_final, double dt) {
  NonlinearData d;
  d.u10 = (ws.nodes().array() * (pi / 2.0)).cos().matrix().cast<cplx>();
  d.omega.assign(1, CVec::Zero(ws.n()));
  NonlinearOptions o;
  o.dt = dt;
  o.t_final = t_final;
  const NonlinearRun r = run_nonlinear(ws, profile, nu, 1, d, data_h4_sum(ws, d), o);
  const double decay = std::exp(-nu * pi * pi * r.final_state.time / 4.0);
  const CVec exact = decay * d.u10;
  return (r.final_state.u10 - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff();
}

}  // namespace shearstab
