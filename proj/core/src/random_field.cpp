#include "shearstab/random_field.hpp"

#include <cmath>
#include <random>

namespace shearstab {

cplx ChebSeries::operator()(double y) const {
  // Clenshaw recurrence
  cplx b1 = 0.0, b2 = 0.0;
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 1; --k) {
    const cplx b0 = coeffs[k] + 2.0 * y * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  const cplx c0 = coeffs.empty() ? cplx(0.0) : coeffs[0];
  return c0 + y * b1 - b2;
}

CVec ChebSeries::sample(const RVec& ys) const {
  CVec out(ys.size());
  for (Eigen::Index j = 0; j < ys.size(); ++j) out(j) = (*this)(ys(j));
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ChebSeries random_series(std::uint64_t seed, int degree, double decay) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ChebSeries s;
  s.coeffs.resize(static_cast<std::size_t>(degree) + 1);
  double scale = 1.0;
  for (auto& c : s.coeffs) {
    const double re = normal(rng);
    const double im = normal(rng);
    c = scale * cplx(re, im);
    scale *= decay;
  }
  return s;
}

Field sample_field(const SpectralWorkspace& ws, int alpha, const ChebSeries& s) {
  return Field(s.sample(ws.nodes()), alpha);
}

Field random_field(const SpectralWorkspace& ws, int alpha, std::uint64_t seed,
                   int wall_power) {
  Field f = sample_field(ws, alpha, random_series(seed));
  if (wall_power > 0) {
    const RVec wgt = (1.0 - ws.nodes().array().square()).pow(wall_power).matrix();
    f.values = (f.values.array() * wgt.array().cast<cplx>()).matrix();
    f.values(0) = 0.0;
    f.values(ws.n() - 1) = 0.0;
  }
  return f;
}

}  // namespace shearstab
