#include <doctest.h>

#include <cmath>

#include "shearstab/airy.hpp"

using namespace shearstab;

namespace {

bool close(cplx a, cplx b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

struct Reference {
  cplx z, ai, dai, integral;
};

// 30-digit values from an independent arbitrary-precision evaluation.
const Reference kRefs[] = {
    {0.0, 0.355028053887817239, -0.258819403792806798, 1.0 / 3.0},
    {1.0, 0.135292416312881416, -0.159147441296793213, 0.0970159914162235537},
    {-2.0, 0.227407428201685576, 0.618259020741691041, 1.23510615937193971},
    {5.0, 1.08344428136074417e-4, -2.47413890868462476e-4, 4.57430274154538467e-5},
    {{1.0, 2.0},
     {-0.219386254981427557, -0.175385911408109418},
     {0.170444978178914823, 0.387622439413295090},
     {-0.168868570376209406, -0.0513824026537664271}},
    {{-3.0, 4.0},
     {207.734715160783122, 204.605630024396880},
     {199.601609926764654, -604.678476245264866},
     {133.892236528669770, -48.8698125723856739}},
};

}  // namespace

TEST_CASE("Airy function against reference values") {
  for (const auto& r : kRefs) {
    CAPTURE(r.z);
    CHECK(close(airy(r.z), r.ai, 1e-10));
    CHECK(close(airy_prime(r.z), r.dai, 1e-10));
    CHECK(close(airy_integral(r.z), r.integral, 1e-9));
  }
}

TEST_CASE("Airy equation holds in the complex plane") {
  const double h = 1e-4;
  for (cplx z : {cplx(0.3, 0.2), cplx(-2.0, 1.5), cplx(4.0, -3.0), cplx(-6.0, -1.0)}) {
    const cplx d2 = (airy_prime(z + h) - airy_prime(z - h)) / (2.0 * h);
    CAPTURE(z);
    CHECK(std::abs(d2 - z * airy(z)) < 1e-6 * std::max(1.0, std::abs(z * airy(z))));
  }
}

TEST_CASE("primitive differentiates back to Ai") {
  const double h = 1e-4;
  for (cplx z : {cplx(0.5, 0.5), cplx(-3.0, 2.0), cplx(2.0, -1.0)}) {
    const cplx d = (airy_integral(z + h) - airy_integral(z - h)) / (2.0 * h);
    CHECK(std::abs(d + airy(z)) < 1e-7 * std::max(1.0, std::abs(airy(z))));
  }
}

TEST_CASE("scaled evaluation survives large arguments") {
  for (double r : {50.0, 150.0, 300.0}) {
    for (double theta : {0.0, 1.0, 2.5, -2.5}) {
      const cplx z = std::polar(r, theta);
      const AiryScaled a = airy_scaled(z);
      CHECK(std::isfinite(a.log_scale));
      CHECK(std::isfinite(std::abs(a.ai)));
      // Leading-order asymptotics: Ai'/Ai ~ -sqrt(z) away from the Stokes line.
      if (std::abs(theta) < 2.0)
        CHECK(std::abs(a.dai / a.ai + std::sqrt(z)) < 0.05 * std::sqrt(r));
    }
  }
}

TEST_CASE("A0 branches") {
  CHECK(std::abs(airy_a0(0.0, 1) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(airy_a0(0.0, 2) - 1.0 / 3.0) < 1e-12);
  const cplx rot = std::polar(1.0, pi / 6.0);
  for (cplx z : {cplx(1.0, 0.5), cplx(-2.0, 3.0), cplx(4.0, -1.0)}) {
    CHECK(close(airy_a0(z, 1), airy_integral(rot * z), 1e-10));
    CHECK(close(airy_a0(z, 2), airy_a0(-std::conj(z), 1), 1e-12));
  }
}
