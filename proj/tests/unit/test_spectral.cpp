#include <doctest.h>

#include <cmath>

#include "shearstab/random_field.hpp"
#include "shearstab/spectral.hpp"

using namespace shearstab;

TEST_CASE("nodes are descending Chebyshev points") {
  const SpectralWorkspace ws(33);
  CHECK(ws.nodes()(0) == doctest::Approx(1.0));
  CHECK(ws.nodes()(32) == doctest::Approx(-1.0));
  for (int i = 1; i < 33; ++i) CHECK(ws.nodes()(i) < ws.nodes()(i - 1));
}

TEST_CASE("differentiation is exact on polynomials") {
  const SpectralWorkspace ws(24);
  const RVec& y = ws.nodes();
  const RVec p = y.array().pow(5) - 3.0 * y.array().square() + 2.0;
  const RVec dp = 5.0 * y.array().pow(4) - 6.0 * y.array();
  const RVec d2p = 20.0 * y.array().pow(3) - 6.0;
  CHECK((ws.d1() * p - dp).cwiseAbs().maxCoeff() < 1e-11);
  CHECK((ws.d2() * p - d2p).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Clenshaw-Curtis quadrature") {
  const SpectralWorkspace ws(40);
  const RVec& y = ws.nodes();
  CHECK(ws.quad().sum() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ws.quad().dot(y.array().pow(6).matrix()) == doctest::Approx(2.0 / 7.0).epsilon(1e-13));
  CHECK(ws.quad().dot(y.array().exp().matrix()) ==
        doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("Helmholtz solve matches closed forms") {
  const SpectralWorkspace ws(64);
  const RVec& y = ws.nodes();
  const int n = ws.n();
  const Field psi = helmholtz_solve(ws, 1, Field(CVec::Ones(n), 1));
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(psi.values(i) - (std::cosh(y(i)) / std::cosh(1.0) - 1.0)) < 1e-12);

  for (int alpha : {1, 3}) {
    const Field w(((pi * y.array()).sin()).matrix().cast<cplx>(), alpha);
    const Field p = helmholtz_solve(ws, alpha, w);
    for (int i = 0; i < n; ++i)
      CHECK(std::abs(p.values(i) + std::sin(pi * y(i)) / (pi * pi + alpha * alpha)) < 1e-12);
  }
}

TEST_CASE("norms are homogeneous and satisfy the triangle inequality") {
  const SpectralWorkspace ws(48);
  const Field f = random_field(ws, 2, 11);
  const Field g = random_field(ws, 2, 12);
  const Field sum(f.values + g.values, 2);
  const Field scaled(cplx(0.0, -3.0) * f.values, 2);
  for (NormKind k : {NormKind::L2, NormKind::grad_alpha, NormKind::H1_dual, NormKind::Linf,
                     NormKind::L1, NormKind::weighted_sqrt_1my2}) {
    CAPTURE(static_cast<int>(k));
    CHECK(norm(ws, scaled, k) == doctest::Approx(3.0 * norm(ws, f, k)).epsilon(1e-12));
    CHECK(norm(ws, sum, k) <= norm(ws, f, k) + norm(ws, g, k) + 1e-12);
  }
}

TEST_CASE("norm ordering on H^1_0 functions") {
  const SpectralWorkspace ws(64);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Field f = random_field(ws, 1, seed);
    // Poincare: ||f|| <= ||(d_y, alpha) f|| / sqrt(pi^2/4 + alpha^2), and the dual norm is
    // bounded by the L2 norm over the same constant.
    const double c = std::sqrt(pi * pi / 4.0 + 1.0);
    CHECK(norm(ws, f, NormKind::L2) <= norm(ws, f, NormKind::grad_alpha) / c * (1 + 1e-10));
    CHECK(norm(ws, f, NormKind::H1_dual) <= norm(ws, f, NormKind::L2) / c * (1 + 1e-10));
    CHECK(norm(ws, f, NormKind::Hk_alpha, 1) >= norm(ws, f, NormKind::L2));
  }
}

TEST_CASE("random fields are grid independent and seed determined") {
  const SpectralWorkspace a(48), b(96);
  const ChebSeries s = random_series(7);
  const Field fa = sample_field(a, 1, s);
  const Field fb = sample_field(b, 1, s);
  for (double y : {-0.7, 0.1, 0.55})
    CHECK(std::abs(a.grid().interpolate(fa.values, y) - b.grid().interpolate(fb.values, y)) <
          1e-12);
  CHECK(random_field(a, 1, 3).values.isApprox(random_field(a, 1, 3).values));
  CHECK(!random_field(a, 1, 3).values.isApprox(random_field(a, 1, 4).values));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("Helmholtz cache is shared across threads") {
  const SpectralWorkspace ws(32);
  const HelmholtzOperator* first = &ws.helmholtz(2);
  CHECK(first == &ws.helmholtz(2));
  CHECK(first != &ws.helmholtz(3));
}
