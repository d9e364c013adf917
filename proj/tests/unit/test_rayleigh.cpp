#include <doctest.h>

#include "shearstab/random_field.hpp"
#include "shearstab/rayleigh.hpp"

using namespace shearstab;

TEST_CASE("Rayleigh solve with limiting absorption") {
  const SpectralWorkspace ws(96);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  for (double delta : {1e-1, 1e-2}) {
    const Field f = random_field(ws, 1, 5, 1);
    const RayleighSolution s = solve_ray_delta(ws, p, 1, 0.4, delta, f);
    CAPTURE(delta);
    CHECK(s.residual < 1e-8);
    CHECK(std::abs(s.psi.values(0)) < 1e-12);
    CHECK(std::abs(s.psi.values(95)) < 1e-12);
    const EstimateCheck c = check_ray_bounds(ws, p, s, f);
    CHECK(std::isfinite(c.ratio));
    CHECK(c.ratio > 0.0);
  }
}

TEST_CASE("coercivity margin is non-negative on random fields") {
  const SpectralWorkspace ws(96);
  for (ProfileKind kind : {ProfileKind::poiseuille, ProfileKind::quartic}) {
    const FlowProfile p = make_profile(kind);
    for (int alpha : {1, 4}) {
      for (double lambda : {0.1, 0.5, 0.9}) {
        const CoercivityProbe probe(ws, p, alpha, lambda);
        for (std::uint64_t s = 0; s < 10; ++s) {
          const CoercivityReport r = probe.evaluate(random_field(ws, alpha, mix_seed(3, s)));
          CAPTURE(lambda);
          CHECK(r.margin >= -1e-8 * r.scale);
          CHECK(std::isfinite(r.hardy.ratio));
          CHECK(std::isfinite(r.single_point.ratio));
        }
      }
    }
  }
}

TEST_CASE("probe agrees with the one-shot checks") {
  const SpectralWorkspace ws(64);
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  const Field w = random_field(ws, 2, 9);
  const CoercivityReport r = CoercivityProbe(ws, p, 2, 0.5).evaluate(w);
  const auto [l2, h1] = check_coercive(ws, p, 2, 0.5, w);
  CHECK(l2.lhs == doctest::Approx(r.coercive_l2.lhs).epsilon(1e-10));
  CHECK(h1.ratio == doctest::Approx(r.coercive_h1.ratio).epsilon(1e-10));
  CHECK(check_hardy_type(ws, p, 2, 0.5, w).ratio ==
        doctest::Approx(r.hardy.ratio).epsilon(1e-10));
}

TEST_CASE("coercive ratios are stable under grid refinement") {
  const FlowProfile p = make_profile(ProfileKind::quartic);
  const SpectralWorkspace a(96), b(160);
  const CoercivityReport ra = CoercivityProbe(a, p, 1, 0.7).evaluate(random_field(a, 1, 21));
  const CoercivityReport rb = CoercivityProbe(b, p, 1, 0.7).evaluate(random_field(b, 1, 21));
  CHECK(ra.hardy.ratio == doctest::Approx(rb.hardy.ratio).epsilon(1e-6));
  CHECK(ra.coercive_h1.ratio == doctest::Approx(rb.coercive_h1.ratio).epsilon(1e-6));
}
