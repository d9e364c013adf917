#include <doctest.h>

#include <vector>

#include "shearstab/common.hpp"
#include "shearstab/profiles.hpp"

using namespace shearstab;

TEST_CASE("Poiseuille profile in shifted form") {
  const FlowProfile p = make_profile(ProfileKind::poiseuille);
  for (double y : {-1.0, -0.3, 0.0, 0.8}) {
    CHECK(p.u(y) == doctest::Approx(y * y));
    CHECK(p.du(y) == doctest::Approx(2.0 * y));
    CHECK(p.d2u(y) == doctest::Approx(2.0));
  }
  CHECK(p.u_min() == 0.0);
  CHECK(p.u_max() == doctest::Approx(1.0));
}

TEST_CASE("quartic profile") {
  const FlowProfile p = make_profile(ProfileKind::quartic);
  CHECK(p.u_max() == doctest::Approx(1.5));
  CHECK(p.inf_d2u() > 0.0);
  const std::vector<double> c4{0.25};
  CHECK(make_profile(ProfileKind::quartic, c4).u_max() == doctest::Approx(1.25));
}

TEST_CASE("profile validation") {
  const std::vector<double> odd{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(make_profile(ProfileKind::custom_coefficients, odd), PreconditionError);
  const std::vector<double> concave{0.0, 0.0, -1.0};
  CHECK_THROWS_AS(make_profile(ProfileKind::custom_coefficients, concave), PreconditionError);
  CHECK_THROWS_AS(parse_profile_kind("couette"), ConfigError);
  CHECK(parse_profile_kind(to_string(ProfileKind::quartic)) == ProfileKind::quartic);
}

TEST_CASE("critical points are symmetric roots") {
  const FlowProfile p = make_profile(ProfileKind::quartic);
  for (double lambda : {0.1, 0.7, 1.4}) {
    const auto [y1, y2] = critical_points(p, lambda);
    CHECK(y1 == doctest::Approx(-y2));
    CHECK(p.u(y2) == doctest::Approx(lambda).epsilon(1e-12));
  }
  const CriticalLayer layer = make_critical_layer(p, 0.0);
  CHECK(layer.degenerate);
}

TEST_CASE("smoothstep") {
  CHECK(smoothstep(-1.0) == 0.0);
  CHECK(smoothstep(2.0) == 1.0);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5));
  CHECK(smoothstep_derivative(0.0) == doctest::Approx(0.0));
  CHECK(smoothstep_derivative(1.0) == doctest::Approx(0.0));
}
