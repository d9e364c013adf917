#include <doctest.h>

#include <cmath>

#include "shearstab/estimate.hpp"

using namespace shearstab;

TEST_CASE("power-law fit recovers exact exponents") {
  std::vector<double> xs{1e-3, 3e-4, 1e-4, 3e-5, 1e-5}, ys;
  for (double x : xs) ys.push_back(2.5 * std::pow(x, -0.75));
  const ScalingFit f = fit_power_law(xs, ys);
  CHECK(f.slope == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(f.r2 == doctest::Approx(1.0));
}

TEST_CASE("line fit") {
  const LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
}

TEST_CASE("estimate checks") {
  const EstimateCheck c = make_check("lemma2.2", 2.0, 4.0, 64, {{"alpha", 1.0}});
  CHECK(c.ratio == doctest::Approx(0.5));
  CHECK_FALSE(c.rhs_zero);
  CHECK(make_check("x", 0.0, 0.0, 8).rhs_zero);
  const EstimateCheck s = skipped_check("lemma3.1", "outside regime");
  CHECK(s.skipped);
  CHECK(s.note == "outside regime");
}
