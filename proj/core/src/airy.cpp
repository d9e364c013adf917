#include "shearstab/airy.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace shearstab {
namespace {

constexpr double kAi0 = 0.355028053887817239260;
constexpr double kDAi0 = -0.258819403792806798405;
constexpr double kAsymptoticRadius = 12.0;
constexpr double kInnerRadius = 2.0;

struct State {
  cplx f;
  cplx df;
  cplx integral;   // running primitive of Ai, in the same scale
  double log_scale;
};

void renormalize(State& s) {
  const double m = std::abs(s.f) + std::abs(s.df);
  if (m > 0.0 && std::isfinite(m)) {
    s.f /= m;
    s.df /= m;
    s.integral /= m;
    s.log_scale += std::log(m);
  }
}

/// One Taylor step of Ai'' = z Ai from z0 with increment h.
void taylor_step(cplx z0, cplx h, State& s) {
  const cplx h2 = h * h;
  const cplx h3 = h2 * h;
  cplx bm1 = 0.0;   // b_{k-1}
  cplx b0 = s.f;    // b_k
  cplx b1 = s.df * h;
  cplx f = b0 + b1;
  cplx df = b1;          // sum k b_k, divided by h at the end
  cplx in = b0 + b1 / 2.0;   // sum b_k / (k + 1), times h at the end
  int quiet = 0;
  for (int k = 0; k < 400; ++k) {
    const cplx b2 = (z0 * h2 * b0 + h3 * bm1) / double((k + 1) * (k + 2));
    const double kk = k + 2;
    f += b2;
    df += kk * b2;
    in += b2 / (kk + 1.0);
    const double scale = std::abs(f) + std::abs(df) + 1e-300;
    if (std::abs(b2) * (kk + 1.0) <= 1e-18 * scale) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
    bm1 = b0;
    b0 = b1;
    b1 = b2;
  }
  s.integral += in * h;
  s.f = f;
  s.df = df / h;
}

/// Integrates from za (state given) to zb along the straight segment.
State walk(cplx za, State s, cplx zb) {
  const double len = std::abs(zb - za);
  if (len == 0.0) return s;
  const double rmax = std::max({std::abs(za), std::abs(zb), 1.0});
  const double hmax = std::min(0.5, 1.0 / std::sqrt(rmax));
  const int steps = std::max(1, static_cast<int>(std::ceil(len / hmax)));
  const cplx h = (zb - za) / double(steps);
  for (int i = 0; i < steps; ++i) {
    taylor_step(za + double(i) * h, h, s);
    renormalize(s);
  }
  return s;
}

AiryScaled asymptotic(cplx z) {
  const cplx logz = std::log(z);
  const cplx zeta = (2.0 / 3.0) * std::exp(1.5 * logz);
  const cplx z14 = std::exp(0.25 * logz);
  const cplx inv = 1.0 / zeta;
  cplx su = 1.0;
  cplx sv = 1.0;
  double u = 1.0;
  cplx p = 1.0;
  double last = 1.0;
  for (int k = 1; k < 40; ++k) {
    u *= double(6 * k - 5) * double(6 * k - 3) * double(6 * k - 1) /
         (double(2 * k - 1) * 216.0 * double(k));
    const double v = -double(6 * k + 1) / double(6 * k - 1) * u;
    p *= -inv;
    const double term = std::abs(u * p);
    if (term > last) break;
    su += u * p;
    sv += v * p;
    last = term;
    if (term < 1e-18) break;
  }
  const cplx e = -zeta;
  AiryScaled out;
  out.log_scale = e.real();
  const cplx phase = std::exp(cplx(0.0, e.imag()));
  const double c = 0.5 / std::sqrt(pi);
  out.ai = c * phase * su / z14;
  out.dai = -c * phase * z14 * sv;
  return out;
}

AiryScaled combine(cplx ca, const AiryScaled& a, cplx cda, cplx cb, const AiryScaled& b,
                   cplx cdb) {
  const double m = std::max(a.log_scale, b.log_scale);
  const double ea = std::exp(a.log_scale - m);
  const double eb = std::exp(b.log_scale - m);
  AiryScaled out;
  out.log_scale = m;
  out.ai = ca * a.ai * ea + cb * b.ai * eb;
  out.dai = cda * a.dai * ea + cdb * b.dai * eb;
  return out;
}

AiryScaled from_state(const State& s) { return AiryScaled{s.f, s.df, s.log_scale}; }

template <class F>
cplx integrate_segment(F&& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-12,
                                                                        &err);
}

/// int_z^{z + inf e} Ai(t) dt * exp(-shift) along the ray with direction e.
cplx ray_integral(cplx z, cplx e, double shift) {
  auto f = [&](double t) {
    const AiryScaled a = airy_scaled(z + e * t);
    return a.ai * std::exp(a.log_scale - shift) * e;
  };
  cplx total = 0.0;
  double t0 = 0.0;
  double len = 0.5;
  for (int piece = 0; piece < 200; ++piece) {
    const cplx part = integrate_segment(f, t0, t0 + len);
    total += part;
    t0 += len;
    if (piece >= 2 && std::abs(part) <= 1e-17 * std::abs(total)) break;
    len = std::min(len * 1.5, 4.0);
  }
  return total;
}

}  // namespace

AiryScaled airy_scaled(cplx z) {
  const double r = std::abs(z);
  const double th = std::arg(z);
  if (r >= kAsymptoticRadius) {
    if (std::abs(th) <= 2.0 * pi / 3.0) return asymptotic(z);
    const cplx w = std::exp(cplx(0.0, 2.0 * pi / 3.0));
    const cplx w2 = w * w;
    return combine(-w, asymptotic(w * z), -w2, -w2, asymptotic(w2 * z), -w);
  }
  if (r <= kInnerRadius || std::abs(th) >= pi / 3.0) {
    State s{kAi0, kDAi0, 0.0, 0.0};
    return from_state(walk(0.0, s, z));
  }
  const cplx start = std::polar(kAsymptoticRadius, th);
  const AiryScaled a = asymptotic(start);
  State s{a.ai, a.dai, 0.0, a.log_scale};
  return from_state(walk(start, s, z));
}

cplx airy(cplx z) { return airy_scaled(z).value(); }
cplx airy_prime(cplx z) { return airy_scaled(z).derivative(); }

ScaledValue airy_integral_scaled(cplx z) {
  const AiryScaled az = airy_scaled(z);
  const double shift = az.log_scale + std::log(std::max(std::abs(az.ai), 1e-300));
  const double r = std::abs(z);
  const double th = std::abs(std::arg(z));
  if (r > 0.0 && th >= pi / 3.0) {
    // Ai grows along the ray, so integrating outward from 0 is stable.
    State s{kAi0, kDAi0, -1.0 / 3.0, 0.0};
    s = walk(0.0, s, z);
    return ScaledValue{-s.integral, s.log_scale};
  }
  if (r == 0.0 || th <= pi / 4.0) {
    const cplx e = r == 0.0 ? cplx(1.0, 0.0) : z / r;
    return ScaledValue{ray_integral(z, e, shift), shift};
  }
  // F(z) = F(|z|) - int_{|z|}^{z} Ai along the chord.
  const ScaledValue fr = airy_integral_scaled(cplx(r, 0.0));
  const cplx dz = z - r;
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(dz))));
  auto f = [&](double tau) {
    const AiryScaled a = airy_scaled(r + tau * dz);
    return a.ai * std::exp(a.log_scale - shift) * dz;
  };
  cplx chord = 0.0;
  for (int i = 0; i < pieces; ++i)
    chord += integrate_segment(f, double(i) / pieces, double(i + 1) / pieces);
  const cplx value = fr.value * std::exp(fr.log_scale - shift) - chord;
  return ScaledValue{value, shift};
}

cplx airy_integral(cplx z) { return airy_integral_scaled(z).unscaled(); }

ScaledValue airy_a0_scaled(cplx z, int branch) {
  const cplx rot = std::exp(cplx(0.0, pi / 6.0));
  if (branch == 1) return airy_integral_scaled(rot * z);
  if (branch == 2) return airy_integral_scaled(rot * (-std::conj(z)));
  throw PreconditionError("airy_a0: branch must be 1 or 2");
}

cplx airy_a0(cplx z, int branch) { return airy_a0_scaled(z, branch).unscaled(); }

}  // namespace shearstab
