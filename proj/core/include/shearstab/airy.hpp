#pragma once

#include "shearstab/common.hpp"

namespace shearstab {

/// Ai(z) = ai * exp(log_scale), Ai'(z) = dai * exp(log_scale).
struct AiryScaled {
  cplx ai;
  cplx dai;
  double log_scale = 0.0;

  cplx value() const { return ai * std::exp(log_scale); }
  cplx derivative() const { return dai * std::exp(log_scale); }
};

/// A complex number stored as value * exp(log_scale).
struct ScaledValue {
  cplx value;
  double log_scale = 0.0;

  cplx unscaled() const { return value * std::exp(log_scale); }
};

/// Ai and Ai' with exponential scaling, for |z| up to a few hundred.
AiryScaled airy_scaled(cplx z);

cplx airy(cplx z);
cplx airy_prime(cplx z);

/// Primitive F(z) = int_z^{+inf} Ai(t) dt, with the path ending in |arg t| < pi/3.
ScaledValue airy_integral_scaled(cplx z);
cplx airy_integral(cplx z);

/// A0^{(1)}(z) = int_{e^{i pi/6} z}^{+inf} Ai, A0^{(2)}(z) = A0^{(1)}(-conj(z)).
cplx airy_a0(cplx z, int branch);
ScaledValue airy_a0_scaled(cplx z, int branch);

}  // namespace shearstab
