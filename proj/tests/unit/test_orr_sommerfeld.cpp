#include <doctest.h>

#include <cmath>

#include "shearstab/orr_sommerfeld.hpp"
#include "shearstab/random_field.hpp"

using namespace shearstab;

TEST_CASE("Orr-Sommerfeld solve satisfies its boundary conditions") {
  const SpectralWorkspace ws(128);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  for (BoundaryCondition bc : {BoundaryCondition::non_slip, BoundaryCondition::navier_slip}) {
    const OSProblem prob{1e-3, 1, 0.3, bc};
    const OSSolution s = solve_os(ws, p, prob, random_field(ws, 1, 2));
    CAPTURE(to_string(bc));
    CHECK(s.residual < 1e-8);
    CHECK(s.bc_defect < 1e-8);
    if (bc == BoundaryCondition::navier_slip) {
      CHECK(std::abs(s.w.values(0)) < 1e-12);
    }
  }
}

TEST_CASE("solve is linear in the forcing") {
  const SpectralWorkspace ws(64);
  const FlowProfile p = make_profile(ProfileKind::quartic);
  const OSProblem prob{1e-2, 2, 0.8, BoundaryCondition::non_slip};
  const Field f = random_field(ws, 2, 1), g = random_field(ws, 2, 2);
  const cplx c(0.5, -2.0);
  const OSSolution a = solve_os(ws, p, prob, f);
  const OSSolution b = solve_os(ws, p, prob, g);
  const OSSolution ab = solve_os(ws, p, prob, Field(f.values + c * g.values, 2));
  CHECK((ab.w.values - a.w.values - c * b.w.values).norm() < 1e-9 * ab.w.values.norm());
}

TEST_CASE("problem validation") {
  CHECK_THROWS_AS(validate(OSProblem{0.02, 1, 0.0}), PreconditionError);
  CHECK_THROWS_AS(validate(OSProblem{0.0, 1, 0.0}), PreconditionError);
  OSProblem shifted{1e-4, 1, 0.0};
  shifted.o_shift = 0.2 * std::sqrt(1e-4);
  CHECK_THROWS_AS(validate(shifted), PreconditionError);
  shifted.o_shift = 0.05 * std::sqrt(1e-4);
  CHECK_NOTHROW(validate(shifted));
}

TEST_CASE("names round trip") {
  for (NormPair pair : all_norm_pairs()) CHECK(parse_norm_pair(to_string(pair)) == pair);
  CHECK(parse_bc(to_string(BoundaryCondition::navier_slip)) == BoundaryCondition::navier_slip);
  CHECK_THROWS_AS(parse_bc("periodic"), ConfigError);
  CHECK_THROWS_AS(parse_norm_pair("L3->L2_w"), ConfigError);
}

TEST_CASE("reference exponent table") {
  CHECK(paper_exponent(BoundaryCondition::non_slip, NormPair::L2_L2w) == doctest::Approx(0.625));
  CHECK(paper_exponent(BoundaryCondition::non_slip, NormPair::H1_L2u) == doctest::Approx(0.0));
  CHECK(paper_exponent(BoundaryCondition::navier_slip, NormPair::L2_L2w) ==
        doctest::Approx(0.5));
  CHECK(paper_exponent(BoundaryCondition::navier_slip, NormPair::Hm1_L2w) ==
        doctest::Approx(0.75));
}

TEST_CASE("resolvent norms: evaluator, direct and ordering") {
  const SpectralWorkspace ws(96);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const std::vector<NormPair> pairs{NormPair::L2_L2w, NormPair::Hm1_L2w, NormPair::L2_L2u};
  const ResolventEvaluator ev(ws, p, 1e-3, 1, BoundaryCondition::navier_slip);
  const auto v = ev.evaluate(0.5, pairs);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    CHECK(v[k] > 0.0);
    const OSProblem prob{1e-3, 1, 0.5, BoundaryCondition::navier_slip};
    CHECK(resolvent_norm(ws, p, prob, pairs[k]) == doctest::Approx(v[k]).epsilon(1e-8));
  }
  // The H^{-1} norm is weaker than L2, so the operator norm from it is larger.
  CHECK(v[1] >= v[0]);
}

TEST_CASE("lambda scan is refined and thread independent") {
  const SpectralWorkspace ws(64);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  ScanOptions o;
  o.points = 21;
  const std::vector<NormPair> pairs{NormPair::L2_L2w};
  const ResolventScan a = scan_lambda(ws, p, 1e-2, 1, BoundaryCondition::navier_slip, pairs, o);
  o.threads = 3;
  const ResolventScan b = scan_lambda(ws, p, 1e-2, 1, BoundaryCondition::navier_slip, pairs, o);
  CHECK(a.sup_norm[0] == b.sup_norm[0]);
  CHECK(a.lambda_grid == b.lambda_grid);
  CHECK(a.evaluations >= 21);
  CHECK(std::is_sorted(a.lambda_grid.begin(), a.lambda_grid.end()));
}

TEST_CASE("energy estimates on Navier-slip solves") {
  const SpectralWorkspace ws(128);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const OSProblem prob{1e-3, 1, 0.4, BoundaryCondition::navier_slip};
  const auto checks = check_energy_estimates(ws, p, prob, random_field(ws, 1, 8, 1));
  CHECK(!checks.empty());
  for (const auto& c : checks) {
    CAPTURE(c.check_id);
    if (!c.skipped) CHECK(std::isfinite(c.ratio));
  }
  CHECK(std::isfinite(check_weak_type(ws, p, prob, random_field(ws, 1, 8, 1)).ratio));
}
