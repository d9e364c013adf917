#include <doctest.h>

#include <cmath>

#include "shearstab/boundary_layer.hpp"
#include "shearstab/random_field.hpp"

using namespace shearstab;

TEST_CASE("corrector grid resolves the wall layers") {
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const int coarse = corrector_grid_size(p, 1e-3, 1, 0.5);
  const int fine = corrector_grid_size(p, 1e-5, 1, 0.5);
  CHECK(coarse >= 64);
  CHECK(fine > coarse);
}

TEST_CASE("non-slip solution decomposes into Navier-slip part and correctors") {
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  for (double lambda : {0.2, 0.5}) {
    const double nu = 1e-4;
    const int n = corrector_grid_size(p, nu, 1, lambda);
    const SpectralWorkspace ws(n);
    const OSProblem prob{nu, 1, lambda, BoundaryCondition::non_slip};
    const AiryCorrectorSet set = build_correctors(ws, p, prob);
    CHECK(set.L1 >= 10.0);
    CHECK(set.direct_bc_defect < 1e-8);
    const Field F = random_field(ws, 1, 17, 1);
    const NonslipDecomposition d = decompose_nonslip(ws, p, prob, F, set);
    CAPTURE(lambda);
    CHECK(d.mismatch < 1e-6);
    CHECK(d.bc_defect < 1e-6);
    const auto [c1, c2] = corrector_coefficients(ws, p, prob, F);
    CHECK(std::abs(c1 - d.c1) < 1e-8 * (1.0 + std::abs(c1)));
    CHECK(std::abs(c2 - d.c2) < 1e-8 * (1.0 + std::abs(c2)));
  }
}

TEST_CASE("Airy approximation improves as the layer thins") {
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  double previous = INFINITY;
  for (double nu : {1e-3, 1e-4, 1e-5}) {
    const SpectralWorkspace ws(corrector_grid_size(p, nu, 1, 0.2));
    const AiryCorrectorSet set =
        build_correctors(ws, p, OSProblem{nu, 1, 0.2, BoundaryCondition::non_slip});
    const double gap = std::max(set.gap_airy[0], set.gap_airy[1]);
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("thick boundary layers are rejected") {
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const SpectralWorkspace ws(64);
  CHECK_THROWS_AS(build_correctors(ws, p, OSProblem{1e-2, 1, 0.5, BoundaryCondition::non_slip}),
                  PreconditionError);
}

TEST_CASE("sinh kernels") {
  const SpectralWorkspace ws(32);
  const auto [kp, km] = sinh_kernels(ws, 2);
  CHECK(kp(0) == doctest::Approx(1.0));
  CHECK(kp(31) == doctest::Approx(0.0));
  CHECK(km(31) == doctest::Approx(1.0));
  for (int i = 0; i < 32; ++i) CHECK(kp(i) == doctest::Approx(km(31 - i)));
}

TEST_CASE("corrector coefficient bounds are finite") {
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const SpectralWorkspace ws(128);
  const auto checks = check_c_bounds(ws, p, OSProblem{1e-3, 1, 0.5, BoundaryCondition::non_slip},
                                     random_field(ws, 1, 4, 1));
  CHECK(checks.size() == 3);
  for (const auto& c : checks) CHECK(std::isfinite(c.ratio));
}
