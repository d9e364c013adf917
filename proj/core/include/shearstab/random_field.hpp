#pragma once

#include <cstdint>
#include <vector>

#include "shearstab/spectral.hpp"

namespace shearstab {

/// Complex Chebyshev series sum c_k T_k(y); grid independent, so the same
/// seeded function can be sampled on any workspace.
struct ChebSeries {
  std::vector<cplx> coeffs;

  cplx operator()(double y) const;
  CVec sample(const RVec& ys) const;
};

/// Seeded series with Gaussian coefficients scaled by decay^k.
ChebSeries random_series(std::uint64_t seed, int degree = 24, double decay = 0.8);

/// Derives a per-sample seed from a base seed and sample index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

Field sample_field(const SpectralWorkspace& ws, int alpha, const ChebSeries& s);

/// (1 - y^2)^power times the seeded series, vanishing at the walls.
Field random_field(const SpectralWorkspace& ws, int alpha, std::uint64_t seed,
                   int wall_power = 0);

}  // namespace shearstab
