#include "shearstab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "shearstab/acceptance.hpp"
#include "shearstab/airy.hpp"
#include "shearstab/boundary_layer.hpp"
#include "shearstab/evolution.hpp"
#include "shearstab/nonlinear.hpp"
#include "shearstab/random_field.hpp"
#include "shearstab/rayleigh.hpp"

namespace shearstab {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw NumericalError("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw NumericalError("cannot write " + path.string());
  f << text;
}

json check_json(const EstimateCheck& c) {
  json j;
  j["check_id"] = c.check_id;
  j["lhs"] = c.lhs;
  j["rhs"] = c.rhs;
  j["ratio"] = c.ratio;
  j["skipped"] = c.skipped;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

/// Running maximum ratio per check id.
struct CheckSummary {
  std::map<std::string, double> max_ratio;
  std::map<std::string, int> count;
  void add(const EstimateCheck& c) {
    if (c.skipped) return;
    auto [it, fresh] = max_ratio.try_emplace(c.check_id, c.ratio);
    if (!fresh) it->second = std::max(it->second, c.ratio);
    ++count[c.check_id];
  }
  json to_json() const {
    json j = json::object();
    for (const auto& [id, r] : max_ratio) j[id] = {{"max_ratio", r}, {"count", count.at(id)}};
    return j;
  }
};

const std::vector<std::string> kCheckHeader{"profile", "alpha", "nu", "lambda", "delta",
                                            "check_id", "lhs", "rhs", "ratio", "n"};

void check_row(Csv& csv, const std::string& profile, int alpha, double nu, double lambda,
               const EstimateCheck& c) {
  if (c.skipped) return;
  const auto d = c.params.find("delta");
  csv.row({profile, std::to_string(alpha), num(nu), num(lambda),
           d == c.params.end() ? "" : num(d->second), c.check_id, num(c.lhs), num(c.rhs),
           num(c.ratio), std::to_string(c.n)});
}

std::vector<NormPair> pairs_for(const ExperimentConfig& cfg, BoundaryCondition bc) {
  if (!cfg.pairs.empty()) return cfg.pairs;
  if (bc == BoundaryCondition::non_slip)
    return {NormPair::L2_L2w, NormPair::Hm1_L2w, NormPair::Hm1_L2u, NormPair::L2_L2u,
            NormPair::H1_L2u};
  return {NormPair::L2_L2w, NormPair::Hm1_L2w, NormPair::L2_L2u, NormPair::Hm1_L2u};
}

double t_final_for(const ExperimentConfig& cfg, double nu) {
  return cfg.t_final > 0.0 ? cfg.t_final : 5.0 / std::sqrt(nu);
}

struct Context {
  const ExperimentConfig& cfg;
  FlowProfile profile;
  fs::path dir;
  std::ostream& log;
  json summary;
};

void resolvent_scan(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", {"nu", "alpha", "bc", "lambda", "pair", "norm", "n"});
  json fits = json::array();
  ScanOptions so;
  so.points = cfg.scan_points;
  so.refine_tol = cfg.scan_refine_tol;
  so.threads = cfg.threads;
  for (int n : cfg.grids) {
    const SpectralWorkspace ws(n);
    for (BoundaryCondition bc : cfg.bcs)
      for (int alpha : cfg.alphas) {
        const auto pairs = pairs_for(cfg, bc);
        std::vector<ResolventScan> scans;
        for (double nu : cfg.nus) {
          so.o_shift = cfg.o_shift * std::sqrt(nu * alpha);
          scans.push_back(scan_lambda(ws, c.profile, nu, alpha, bc, pairs, so));
          const auto& s = scans.back();
          for (std::size_t i = 0; i < s.lambda_grid.size(); ++i)
            for (std::size_t k = 0; k < pairs.size(); ++k)
              csv.row({num(nu), std::to_string(alpha), to_string(bc), num(s.lambda_grid[i]),
                       to_string(pairs[k]), num(s.norms[i][k]), std::to_string(n)});
          c.log << "  scanned nu=" << nu << " alpha=" << alpha << " bc=" << to_string(bc)
                << " n=" << n << " (" << s.evaluations << " evaluations)\n";
        }
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          json f;
          f["n"] = n;
          f["alpha"] = alpha;
          f["bc"] = to_string(bc);
          f["pair"] = to_string(pairs[k]);
          json sup = json::array();
          for (std::size_t i = 0; i < scans.size(); ++i)
            sup.push_back({{"nu", cfg.nus[i]},
                           {"sup_norm", scans[i].sup_norm[k]},
                           {"argmax_lambda", scans[i].argmax_lambda[k]},
                           {"last_change", scans[i].last_change[k]},
                           {"tail_decreasing", scans[i].tail_decreasing}});
          f["scans"] = sup;
          if (scans.size() >= 2) {
            const ScalingFit fit = fit_scaling(scans, k);
            f["growth_exponent"] = -fit.slope;
            f["r2"] = fit.r2;
          }
          f["reference_exponent"] = paper_exponent(bc, pairs[k]);
          fits.push_back(f);
        }
      }
  }
  c.summary["fits"] = fits;
}

void coercivity_check(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", kCheckHeader);
  CheckSummary sum;
  double worst_margin = std::numeric_limits<double>::infinity();
  const std::uint64_t seed = cfg.seeds.front();
  for (int n : cfg.grids) {
    const SpectralWorkspace ws(n);
    for (int alpha : cfg.alphas)
      for (double lambda : cfg.lambdas) {
        const CoercivityProbe probe(ws, c.profile, alpha, lambda);
        for (int s = 0; s < cfg.samples; ++s) {
          const Field w = random_field(ws, alpha, mix_seed(seed, std::uint64_t(s)));
          const CoercivityReport r = probe.evaluate(w);
          worst_margin = std::min(worst_margin, r.scale > 0 ? r.margin / r.scale : r.margin);
          for (const EstimateCheck* e : {&r.coercive_l2, &r.coercive_h1, &r.hardy,
                                         &r.single_point}) {
            check_row(csv, c.profile.name(), alpha, std::nan(""), lambda, *e);
            sum.add(*e);
          }
        }
        c.log << "  n=" << n << " alpha=" << alpha << " lambda=" << lambda << " done\n";
      }
  }
  c.summary["min_relative_margin"] = worst_margin;
  c.summary["checks"] = sum.to_json();
}

void corrector_check(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", kCheckHeader);
  CheckSummary sum;
  json cases = json::array();
  for (double nu : cfg.nus)
    for (int alpha : cfg.alphas)
      for (double lambda : cfg.lambdas) {
        const int n = std::max(cfg.grids.front(),
                               corrector_grid_size(c.profile, nu, alpha, lambda));
        const SpectralWorkspace ws(n);
        const OSProblem prob{nu, alpha, lambda, BoundaryCondition::non_slip};
        const AiryCorrectorSet set =
            build_correctors(ws, c.profile, prob, cfg.corrector_threshold);
        double mismatch = 0.0, bc_defect = 0.0;
        for (std::uint64_t seed : cfg.seeds) {
          const Field F = random_field(ws, alpha, seed, 1);
          const NonslipDecomposition d = decompose_nonslip(ws, c.profile, prob, F, set);
          mismatch = std::max(mismatch, d.mismatch);
          bc_defect = std::max(bc_defect, d.bc_defect);
          for (const auto& e : check_c_bounds(ws, c.profile, prob, F)) {
            check_row(csv, c.profile.name(), alpha, nu, lambda, e);
            sum.add(e);
          }
        }
        for (const auto& e : set.checks) {
          check_row(csv, c.profile.name(), alpha, nu, lambda, e);
          sum.add(e);
        }
        cases.push_back({{"nu", nu},
                         {"alpha", alpha},
                         {"lambda", lambda},
                         {"n", n},
                         {"L1", set.L1},
                         {"L2", set.L2},
                         {"gap_airy", {set.gap_airy[0], set.gap_airy[1]}},
                         {"gap_exact", {set.gap_exact[0], set.gap_exact[1]}},
                         {"coefficient_condition", set.coefficient_condition},
                         {"direct_bc_defect", set.direct_bc_defect},
                         {"reconstruction_mismatch", mismatch},
                         {"reconstruction_bc_defect", bc_defect}});
        c.log << "  nu=" << nu << " alpha=" << alpha << " lambda=" << lambda << " n=" << n
              << " gap " << std::max(set.gap_airy[0], set.gap_airy[1]) << "\n";
      }
  c.summary["cases"] = cases;
  c.summary["checks"] = sum.to_json();
}

void airy_table(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", {"z_re", "z_im", "Ai_re", "Ai_im", "dAi_re", "dAi_im", "F_re",
                                  "F_im", "A0_re", "A0_im"});
  int rows = 0;
  for (double r : cfg.airy_radii)
    for (int k = 0; k < (r == 0.0 ? 1 : cfg.airy_angles); ++k) {
      const cplx z = std::polar(r, 2.0 * pi * k / cfg.airy_angles);
      const AiryScaled a = airy_scaled(z);
      const ScaledValue F = airy_integral_scaled(z);
      const ScaledValue A0 = airy_a0_scaled(z, 1);
      const cplx ai = a.value(), dai = a.derivative(), f = F.unscaled(), a0 = A0.unscaled();
      csv.row({num(z.real()), num(z.imag()), num(ai.real()), num(ai.imag()), num(dai.real()),
               num(dai.imag()), num(f.real()), num(f.imag()), num(a0.real()), num(a0.imag())});
      ++rows;
    }
  c.summary["rows"] = rows;
  c.summary["Ai(0)"] = airy(0.0).real();
  c.summary["A0(0)"] = airy_a0(0.0, 1).real();
}

void evolve_linear(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", {"nu", "alpha", "bc", "seed", "t", "omega_l2", "u_l2",
                                  "u_linf", "energy_residual"});
  json runs = json::array();
  const SpectralWorkspace ws(cfg.grids.front());
  for (double nu : cfg.nus)
    for (int alpha : cfg.alphas)
      for (BoundaryCondition bc : cfg.bcs)
        for (std::uint64_t seed : cfg.seeds) {
          EvolutionOptions o;
          o.dt = cfg.dt;
          o.t_final = t_final_for(cfg, nu);
          o.eps_weight = cfg.eps_weight;
          o.bc = bc;
          o.record_stride = cfg.record_stride;
          if (cfg.checkpoint_every > 0) {
            o.checkpoint_every = cfg.checkpoint_every;
            o.checkpoint_dir = (c.dir / "checkpoints").string();
            fs::create_directories(o.checkpoint_dir);
          }
          const Field data = seeded_data(ws, alpha, seed);
          const EvolutionRun run = run_linear(ws, c.profile, nu, alpha, data, Forcing{}, o);
          const auto& s = run.series;
          for (std::size_t i = 0; i < s.t.size(); ++i)
            csv.row({num(nu), std::to_string(alpha), to_string(bc), std::to_string(seed),
                     num(s.t[i]), num(s.omega_l2[i]), num(s.u_l2[i]), num(s.u_linf[i]),
                     num(s.energy_residual[i])});
          json r;
          r["nu"] = nu;
          r["alpha"] = alpha;
          r["bc"] = to_string(bc);
          r["seed"] = seed;
          r["n"] = run.n;
          r["dt"] = run.dt;
          r["t_final"] = run.t_final;
          r["functionals"] = run.functionals;
          r["data_h4"] = run.data_h4;
          r["projection_change"] = run.projection_change;
          r["max_bc_defect"] = run.max_bc_defect;
          r["max_energy_residual"] = run.max_energy_residual;
          r["spacetime_bound"] = check_json(verify_spacetime_bound(run));
          try {
            const RateFit f = decay_rate(run);
            r["decay_rate"] = {{"rate", f.rate}, {"t_lo", f.t_lo}, {"t_hi", f.t_hi},
                               {"r2", f.r2}};
          } catch (const PreconditionError& e) {
            r["decay_rate"] = e.what();
          }
          runs.push_back(r);
          c.log << "  nu=" << nu << " alpha=" << alpha << " bc=" << to_string(bc)
                << " seed=" << seed << " done\n";
        }
  c.summary["runs"] = runs;
}

void evolve_euler(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", {"alpha", "seed", "n", "t", "omega_l2", "dy_phi", "alpha_phi",
                                  "omega_center"});
  EulerOptions o;
  o.dt = cfg.euler_dt;
  o.t_final = cfg.euler_t_final;
  o.n_max = cfg.euler_n_max;
  o.tail_tolerance = cfg.euler_tail_tolerance;
  json runs = json::array();
  for (int alpha : cfg.alphas)
    for (std::uint64_t seed : cfg.seeds) {
      const EulerRun e = run_euler(c.profile, cfg.grids.front(), alpha, seed, o);
      const auto& s = e.run.series;
      for (std::size_t i = 0; i < s.t.size(); ++i)
        csv.row({std::to_string(alpha), std::to_string(seed), std::to_string(e.run.n),
                 num(s.t[i]), num(s.omega_l2[i]), num(s.dy_phi[i]), num(s.alpha_phi[i]),
                 num(s.omega_center[i])});
      auto fit = [](const RateFit& f) {
        return json{{"exponent", f.rate}, {"t_lo", f.t_lo}, {"t_hi", f.t_hi}, {"r2", f.r2}};
      };
      runs.push_back({{"alpha", alpha},
                      {"seed", seed},
                      {"n", e.run.n},
                      {"dy_phi", fit(e.dy_phi)},
                      {"alpha_phi", fit(e.alpha_phi)},
                      {"omega_center", fit(e.omega_center)},
                      {"omega_bound_ratio", e.omega_bound_ratio},
                      {"truncated", e.truncated},
                      {"t_resolved", e.t_resolved}});
      c.log << "  alpha=" << alpha << " seed=" << seed << " n=" << e.run.n << " done\n";
    }
  c.summary["runs"] = runs;
}

NonlinearOptions nonlinear_options(const ExperimentConfig& cfg) {
  NonlinearOptions o;
  o.dt = cfg.nonlinear_dt;
  o.t_final = cfg.nonlinear_t_final;
  o.eps_weight = cfg.eps_weight;
  o.record_stride = cfg.record_stride;
  o.bc = cfg.bcs.front();
  return o;
}

const std::vector<std::string> kNonlinearHeader{"nu", "amplitude", "seed", "verdict",
                                                "final_E", "max_E"};

void evolve_nonlinear(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", kNonlinearHeader);
  Csv series(c.dir / "series.csv", {"nu", "amplitude", "seed", "t", "omega_nonzero",
                                    "kinetic_energy", "energy_sum"});
  const SpectralWorkspace ws(cfg.grids.front());
  const NonlinearOptions o = nonlinear_options(cfg);
  json runs = json::array();
  for (double nu : cfg.nus)
    for (double A : cfg.amplitudes)
      for (std::uint64_t seed : cfg.seeds) {
        const double amp = A * std::pow(nu, 2.0 / 3.0);
        const NonlinearRun r =
            run_nonlinear(ws, c.profile, nu, cfg.modes, seeded_multimode(ws, cfg.modes, seed),
                          amp, o);
        csv.row({num(nu), num(amp), std::to_string(seed), to_string(r.verdict),
                 num(r.energy_final), num(r.energy_max)});
        for (std::size_t i = 0; i < r.series.t.size(); ++i)
          series.row({num(nu), num(amp), std::to_string(seed), num(r.series.t[i]),
                      num(r.series.omega_nonzero[i]), num(r.series.kinetic_energy[i]),
                      num(r.series.energy_sum[i])});
        runs.push_back({{"nu", nu},
                        {"A", A},
                        {"amplitude", amp},
                        {"seed", seed},
                        {"verdict", to_string(r.verdict)},
                        {"blowup", r.blowup},
                        {"dt", r.dt},
                        {"dt_retried", r.dt_retried},
                        {"energy_initial", r.energy_initial},
                        {"energy_final", r.energy_final},
                        {"energy_max", r.energy_max},
                        {"linear_prediction", r.linear_prediction},
                        {"nonlinear_final", r.nonlinear_final},
                        {"reality_defect", r.reality_defect},
                        {"zero_mode_residual", r.zero_mode_residual},
                        {"bootstrap", check_json(r.bootstrap)}});
        c.log << "  nu=" << nu << " A=" << A << " seed=" << seed << ": "
              << to_string(r.verdict) << "\n";
      }
  c.summary["runs"] = runs;
}

void threshold(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", kNonlinearHeader);
  const SpectralWorkspace ws(cfg.grids.front());
  const ThresholdTable t = threshold_sweep(ws, c.profile, cfg.nus, cfg.amplitudes, cfg.seeds,
                                           cfg.modes, nonlinear_options(cfg), cfg.threads);
  for (const auto& r : t.rows)
    csv.row({num(r.nu), num(r.amplitude), std::to_string(r.seed), to_string(r.verdict),
             num(r.final_E), num(r.max_E)});
  json cols = json::array();
  for (const auto& col : t.columns)
    cols.push_back({{"nu", col.nu}, {"A_star", col.A_star}, {"status", col.status}});
  c.summary["columns"] = cols;
  c.summary["violations"] = t.violations;
  c.summary["cells"] = t.cells;
  if (t.fit.nus.size() >= 2)
    c.summary["A_star_fit"] = {{"slope", t.fit.slope}, {"r2", t.fit.r2}};
  json boot = json::array();
  for (const auto& b : t.bootstrap) boot.push_back(check_json(b));
  c.summary["bootstrap"] = boot;
}

void estimate_sweep(Context& c) {
  const auto& cfg = c.cfg;
  Csv csv(c.dir / "results.csv", kCheckHeader);
  CheckSummary sum;
  for (int n : cfg.grids) {
    const SpectralWorkspace ws(n);
    for (double nu : cfg.nus)
      for (int alpha : cfg.alphas)
        for (double lambda : cfg.lambdas)
          for (std::uint64_t seed : cfg.seeds) {
            const OSProblem prob{nu, alpha, lambda, BoundaryCondition::navier_slip,
                                 cfg.o_shift * std::sqrt(nu * alpha)};
            const Field F = random_field(ws, alpha, mix_seed(seed, std::uint64_t(n)), 1);
            std::vector<EstimateCheck> all = check_energy_estimates(ws, c.profile, prob, F);
            all.push_back(check_weak_type(ws, c.profile, prob, F));
            const OSProblem clamped{nu, alpha, lambda, BoundaryCondition::non_slip,
                                    prob.o_shift};
            for (auto& e : check_c_bounds(ws, c.profile, clamped, F)) all.push_back(e);
            const double delta = std::cbrt(nu / alpha);
            const RayleighSolution ray =
                solve_ray_delta(ws, c.profile, alpha, lambda, delta, F);
            all.push_back(check_ray_bounds(ws, c.profile, ray, F));
            for (const auto& e : all) {
              check_row(csv, c.profile.name(), alpha, nu, lambda, e);
              sum.add(e);
            }
          }
    c.log << "  n=" << n << " done\n";
  }
  c.summary["checks"] = sum.to_json();
}

int accept(Context& c) {
  const auto& cfg = c.cfg;
  AcceptanceOptions o;
  o.seed = cfg.seeds.front();
  o.threads = cfg.threads;
  o.criteria = cfg.criteria;
  o.on_result = [&](const CriterionResult& r) { c.log << format_result(r) << std::endl; };
  const auto results = run_acceptance(o);
  write_text(c.dir / "acceptance.json", acceptance_summary_json(results, o.seed));
  write_text(c.dir / "acceptance_timings.json", acceptance_timings_json(results));
  Csv csv(c.dir / "results.csv", {"id", "name", "passed", "seconds", "budget_seconds"});
  bool ok = true;
  for (const auto& r : results) {
    csv.row({std::to_string(r.id), r.name, r.passed ? "true" : "false", num(r.seconds),
             num(r.budget_seconds)});
    ok = ok && r.passed && r.within_budget();
  }
  c.summary["all_passed"] = ok;
  c.summary["criteria"] = json::parse(acceptance_summary_json(results, o.seed))["criteria"];
  return ok ? exit_ok : exit_acceptance_failed;
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.kind);
  j["profile"] = to_string(cfg.profile);
  j["profile_coefficients"] = cfg.profile_coefficients;
  j["grids"] = cfg.grids;
  j["nus"] = cfg.nus;
  j["alphas"] = cfg.alphas;
  j["lambdas"] = cfg.lambdas;
  json bcs = json::array();
  for (auto b : cfg.bcs) bcs.push_back(to_string(b));
  j["bcs"] = bcs;
  j["seeds"] = cfg.seeds;
  return j;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  ExperimentOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    validate(cfg);
    const fs::path dir = fs::path(cfg.output_dir) / to_string(cfg.kind);
    fs::create_directories(dir);
    out.output_dir = dir.string();
    Context c{cfg, make_profile(cfg.profile, cfg.profile_coefficients), dir, log, json{}};
    c.summary["config"] = config_json(cfg);
    log << "running " << to_string(cfg.kind) << " -> " << dir.string() << "\n";
    switch (cfg.kind) {
      case ExperimentKind::resolvent_scan: resolvent_scan(c); break;
      case ExperimentKind::coercivity_check: coercivity_check(c); break;
      case ExperimentKind::corrector_check: corrector_check(c); break;
      case ExperimentKind::airy_table: airy_table(c); break;
      case ExperimentKind::evolve_linear: evolve_linear(c); break;
      case ExperimentKind::evolve_euler: evolve_euler(c); break;
      case ExperimentKind::evolve_nonlinear: evolve_nonlinear(c); break;
      case ExperimentKind::threshold_sweep: threshold(c); break;
      case ExperimentKind::estimate_sweep: estimate_sweep(c); break;
      case ExperimentKind::accept: out.exit_code = accept(c); break;
    }
    write_text(dir / "summary.json", c.summary.dump(2) + "\n");
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_text(dir / "timings.json", json{{"experiment", to_string(cfg.kind)},
                                          {"seconds", seconds},
                                          {"threads", cfg.threads}}
                                             .dump(2) +
                                         "\n");
    out.message = out.exit_code == exit_ok ? "ok" : "acceptance criteria failed";
  } catch (const ConfigError& e) {
    out.exit_code = exit_config_error;
    out.message = std::string("configuration error: ") + e.what();
  } catch (const PreconditionError& e) {
    out.exit_code = exit_config_error;
    out.message = std::string("precondition violated: ") + e.what();
  } catch (const std::exception& e) {
    out.exit_code = exit_numerical_failure;
    out.message = std::string("numerical failure: ") + e.what();
  }
  return out;
}

}  // namespace shearstab
