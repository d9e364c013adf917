#include <doctest.h>

#include <cmath>

#include "shearstab/nonlinear.hpp"

using namespace shearstab;

namespace {

NonlinearOptions quick(double dt = 0.05, double t_final = 10.0) {
  NonlinearOptions o;
  o.dt = dt;
  o.t_final = t_final;
  o.record_stride = 5;
  return o;
}

}  // namespace

TEST_CASE("zero amplitude stays at rest") {
  const SpectralWorkspace ws(48);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const NonlinearRun r = run_nonlinear(ws, p, 1e-3, 4, seeded_multimode(ws, 4, 1), 0.0, quick());
  CHECK(r.energy_final == 0.0);
  CHECK(r.final_state.u10.norm() == 0.0);
  CHECK(r.verdict == Verdict::stable);
}

TEST_CASE("zero mode reproduces the heat semigroup") {
  const SpectralWorkspace ws(48);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  CHECK(heat_oracle_error(ws, p, 1e-2, 5.0, 0.05) < 1e-6);
}

TEST_CASE("switching the nonlinearity off reproduces the linear prediction") {
  const SpectralWorkspace ws(48);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  auto o = quick();
  o.nonlinear = false;
  const NonlinearRun r = run_nonlinear(ws, p, 1e-3, 3, seeded_multimode(ws, 3, 2), 1e-2, o);
  for (int a = 0; a < 3; ++a)
    CHECK(r.nonlinear_final[a] == doctest::Approx(r.linear_prediction[a]).epsilon(1e-12));
  CHECK(r.final_state.u10.norm() < 1e-14);
}

TEST_CASE("small data follows the linear dynamics") {
  const SpectralWorkspace ws(48);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const NonlinearRun r = run_nonlinear(ws, p, 1e-3, 4, seeded_multimode(ws, 4, 3), 1e-6, quick());
  for (int a = 0; a < 4; ++a)
    CHECK(std::abs(r.nonlinear_final[a] / r.linear_prediction[a] - 1.0) < 1e-3);
  CHECK(r.verdict == Verdict::stable);
}

TEST_CASE("mean flow stays real") {
  const SpectralWorkspace ws(48);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const NonlinearRun r = run_nonlinear(ws, p, 1e-3, 4, seeded_multimode(ws, 4, 4), 0.05, quick());
  CHECK(r.reality_defect < 1e-12);
  CHECK(r.final_state.mode(-2).isApprox(r.final_state.mode(2).conjugate()));
}

TEST_CASE("inviscid energy drift is second order in the step") {
  const SpectralWorkspace ws(48);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const NonlinearData data = seeded_multimode(ws, 4, 5);
  double drift[2];
  for (int k = 0; k < 2; ++k) {
    auto o = quick(0.04 / (1 << k), 4.0);
    o.background = false;
    const NonlinearRun r = run_nonlinear(ws, p, 0.0, 4, data, 200.0, o);
    const auto& e = r.series.kinetic_energy;
    drift[k] = std::abs(e.back() - e.front()) / e.front();
  }
  CAPTURE(drift[0]);
  CAPTURE(drift[1]);
  CHECK(drift[1] < drift[0]);
  CHECK(drift[0] / drift[1] > 3.0);
}

TEST_CASE("zero-mode residual decreases with the step") {
  const SpectralWorkspace ws(48);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const NonlinearData data = seeded_multimode(ws, 3, 6);
  const NonlinearRun a = run_nonlinear(ws, p, 1e-3, 3, data, 0.2, quick(0.05, 5.0));
  const NonlinearRun b = run_nonlinear(ws, p, 1e-3, 3, data, 0.2, quick(0.025, 5.0));
  CHECK(b.zero_mode_residual < a.zero_mode_residual);
}

TEST_CASE("seeded data and H4 size") {
  const SpectralWorkspace ws(48);
  const NonlinearData d = seeded_multimode(ws, 3, 9);
  CHECK(d.omega.size() == 3);
  CHECK(d.u10.norm() == 0.0);
  CHECK(data_h4_sum(ws, d) == doctest::Approx(6.0));
}

TEST_CASE("argument checks") {
  const SpectralWorkspace ws(32);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const NonlinearData d = seeded_multimode(ws, 2, 1);
  CHECK_THROWS_AS(run_nonlinear(ws, p, 1e-3, 0, d, 1.0), PreconditionError);
  CHECK_THROWS_AS(run_nonlinear(ws, p, 1e-3, 2, d, -1.0), PreconditionError);
  CHECK_THROWS_AS(run_nonlinear(ws, p, 0.0, 2, d, 1.0), PreconditionError);
}

TEST_CASE("threshold sweep bookkeeping") {
  const SpectralWorkspace ws(32);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const ThresholdTable t = threshold_sweep(ws, p, {1e-3}, {0.01, 1.0}, {1, 2}, 2, quick(0.05, 5.0));
  CHECK(t.cells == 4);
  CHECK(t.rows.size() == 4);
  CHECK(t.columns.size() == 1);
  CHECK(t.violations >= 0);
  CHECK(to_string(Verdict::transitioned) == "transitioned");
}

TEST_CASE("small multi-mode data is stable at nu = 1e-4") {
  const SpectralWorkspace ws(96);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const double nu = 1e-4;
  const NonlinearRun r = run_nonlinear(ws, p, nu, 8, seeded_multimode(ws, 8, 42),
                                       0.1 * std::pow(nu, 2.0 / 3.0), quick(0.05, 100.0));
  CHECK(r.verdict == Verdict::stable);
  CHECK_FALSE(r.blowup);
}
