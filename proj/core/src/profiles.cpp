#include "shearstab/profiles.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "shearstab/common.hpp"

namespace shearstab {

namespace {

constexpr int kDenseSamples = 2001;

double integrate(const auto& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 15, 1e-12);
}

// [-1,1] with the balls B(y1,delta) and B(y2,delta) removed.
std::vector<std::pair<double, double>> outside_balls(double y1, double y2,
                                                     double delta) {
  std::vector<std::pair<double, double>> segs;
  const double a = y1 - delta, b = y1 + delta, c = y2 - delta, d = y2 + delta;
  if (a > -1.0) segs.emplace_back(-1.0, a);
  if (c > b) segs.emplace_back(std::max(b, -1.0), std::min(c, 1.0));
  if (d < 1.0) segs.emplace_back(d, 1.0);
  return segs;
}

}  // namespace

ProfileKind parse_profile_kind(const std::string& s) {
  if (s == "poiseuille") return ProfileKind::poiseuille;
  if (s == "quartic") return ProfileKind::quartic;
  if (s == "custom-coefficients" || s == "custom")
    return ProfileKind::custom_coefficients;
  throw ConfigError("unknown profile kind: " + s);
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::poiseuille: return "poiseuille";
    case ProfileKind::quartic: return "quartic";
    case ProfileKind::custom_coefficients: return "custom-coefficients";
  }
  return "unknown";
}

FlowProfile::FlowProfile(std::string name, std::vector<double> coefficients)
    : name_(std::move(name)) {
  if (coefficients.size() > c_.size())
    throw PreconditionError("profile: degree above 8 is not supported");
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    if (!std::isfinite(coefficients[k]))
      throw PreconditionError("profile: non-finite coefficient");
    if (k % 2 == 1 && coefficients[k] != 0.0)
      throw PreconditionError("profile: odd coefficient violates symmetry");
    c_[k] = coefficients[k];
  }
  inf_d2u_ = std::numeric_limits<double>::infinity();
  sup_d2u_ = -inf_d2u_;
  for (int i = 0; i < kDenseSamples; ++i) {
    const double y = -1.0 + 2.0 * i / (kDenseSamples - 1);
    const double v = d2u(y);
    inf_d2u_ = std::min(inf_d2u_, v);
    sup_d2u_ = std::max(sup_d2u_, v);
    if (std::abs(u(y) - u(-y)) > 1e-14)
      throw PreconditionError("profile: not symmetric");
  }
  if (!(inf_d2u_ > 0.0))
    throw PreconditionError("profile: inf U'' must be positive");
}

double FlowProfile::derivative(int order, double y) const {
  if (order < 0) throw PreconditionError("negative derivative order");
  double acc = 0.0;
  for (int k = max_degree; k >= order; --k) {
    double fall = 1.0;
    for (int j = 0; j < order; ++j) fall *= static_cast<double>(k - j);
    acc = acc * y + c_[k] * fall;
  }
  return acc;
}

std::string FlowProfile::table(int points) const {
  std::ostringstream os;
  os << "y,U,dU,d2U\n";
  for (int i = 0; i < points; ++i) {
    const double y = points > 1 ? -1.0 + 2.0 * i / (points - 1) : 0.0;
    os << y << ',' << u(y) << ',' << du(y) << ',' << d2u(y) << '\n';
  }
  return os.str();
}

FlowProfile make_profile(ProfileKind kind, std::span<const double> params) {
  switch (kind) {
    case ProfileKind::poiseuille:
      return FlowProfile("poiseuille", {0.0, 0.0, 1.0});
    case ProfileKind::quartic: {
      const double c4 = params.empty() ? 0.5 : params[0];
      if (c4 < 0.0) throw PreconditionError("quartic profile needs c4 >= 0");
      return FlowProfile("quartic", {0.0, 0.0, 1.0, 0.0, c4});
    }
    case ProfileKind::custom_coefficients:
      if (params.empty())
        throw PreconditionError("custom profile needs coefficients");
      return FlowProfile("custom",
                         std::vector<double>(params.begin(), params.end()));
  }
  throw PreconditionError("unknown profile kind");
}

std::pair<double, double> critical_points(const FlowProfile& profile,
                                          double lambda) {
  const double lo = profile.u_min(), hi = profile.u_max();
  if (!(lambda >= lo && lambda <= hi))
    throw PreconditionError("critical_points: lambda outside [U(0), U(1)]");
  if (lambda == lo) return {0.0, 0.0};
  if (lambda == hi) return {-1.0, 1.0};
  double a = 0.0, b = 1.0;
  for (int it = 0; it < 200 && b - a > 0.0; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    if (profile.u(m) < lambda) a = m; else b = m;
  }
  const double y2 = std::abs(profile.u(a) - lambda) <= std::abs(profile.u(b) - lambda) ? a : b;
  return {-y2, y2};
}

CriticalLayer make_critical_layer(const FlowProfile& profile, double lambda,
                                  double delta, double theta) {
  CriticalLayer c;
  c.lambda = lambda;
  std::tie(c.y1, c.y2) = critical_points(profile, lambda);
  c.degenerate = c.y2 == 0.0;
  if (c.degenerate) {
    c.delta = delta > 0.0 ? delta : 0.0;
    c.theta = 0.0;
    return c;
  }
  c.delta = delta > 0.0 ? delta : 0.5 * c.y2;
  if (c.delta > c.y2)
    throw PreconditionError("critical layer: delta must not exceed y2");
  c.theta = theta > 0.0 ? theta : 0.25 * (c.y2 - c.y1);
  return c;
}

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

double smoothstep_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

double chi(const CriticalLayer& layer, double y) {
  return (y >= layer.y1 && y <= layer.y2) ? 1.0 : 0.0;
}

double chi_c(const CriticalLayer& layer, double y) { return 1.0 - chi(layer, y); }

double rho_exterior(const CriticalLayer& layer, double y) {
  const double h = 0.5 * layer.delta;
  if (y >= 0.0) return smoothstep((y - layer.y2 - h) / h);
  return smoothstep((layer.y1 - h - y) / h);
}

double rho_exterior_derivative(const CriticalLayer& layer, double y) {
  const double h = 0.5 * layer.delta;
  if (y >= 0.0) return smoothstep_derivative((y - layer.y2 - h) / h) / h;
  return -smoothstep_derivative((layer.y1 - h - y) / h) / h;
}

double rho_interior(const CriticalLayer& layer, double y) {
  const double h = 0.5 * layer.delta;
  if (y >= 0.0) return smoothstep((layer.y2 - h - y) / h);
  return smoothstep((y - layer.y1 - h) / h);
}

double rho_interior_derivative(const CriticalLayer& layer, double y) {
  const double h = 0.5 * layer.delta;
  if (y >= 0.0) return -smoothstep_derivative((layer.y2 - h - y) / h) / h;
  return smoothstep_derivative((y - layer.y1 - h) / h) / h;
}

WeightedIntegrals weighted_integrals(const FlowProfile& profile, double lambda,
                                     double delta) {
  const auto [y1, y2] = critical_points(profile, lambda);
  WeightedIntegrals w;
  double l2sq = 0.0, h1sq = 0.0;
  for (const auto& [a, b] : outside_balls(y1, y2, delta)) {
    auto inv = [&](double y) { return 1.0 / std::abs(profile.u(y) - lambda); };
    w.l1 += integrate(inv, a, b);
    l2sq += integrate([&](double y) { return inv(y) * inv(y); }, a, b);
    h1sq += integrate(
        [&](double y) {
          const double q = profile.du(y) * inv(y) * inv(y);
          return q * q;
        },
        a, b);
    // 1/|U-l| is monotone on each segment, so the sup sits at an endpoint.
    w.linf = std::max({w.linf, inv(a), inv(b)});
  }
  w.l2 = std::sqrt(l2sq);
  w.h1 = std::sqrt(h1sq);
  return w;
}

std::vector<EstimateCheck> profile_asymptotics_check(const FlowProfile& profile) {
  std::vector<EstimateCheck> out;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  double qmin = rmin, qmax = 0.0;
  constexpr int m = 201;
  for (int i = 1; i < m; ++i) {
    const double y = static_cast<double>(i) / (m - 1);
    const double r = profile.du(y) / y;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    for (int j = 0; j < m; j += 4) {
      const double yp = -1.0 + 2.0 * j / (m - 1);
      const double den = (y - yp) * (y + yp);
      if (std::abs(den) < 1e-8) continue;
      const double q = (profile.u(y) - profile.u(yp)) / den;
      qmin = std::min(qmin, q);
      qmax = std::max(qmax, q);
    }
  }
  out.push_back(make_check("lemmaA.1.du_over_y.upper", rmax, 1.0, 0));
  out.push_back(make_check("lemmaA.1.du_over_y.lower", 1.0, rmin, 0));
  out.push_back(make_check("lemmaA.1.difference.upper", qmax, 1.0, 0));
  out.push_back(make_check("lemmaA.1.difference.lower", 1.0, qmin, 0));

  const double u0 = profile.u_min(), u1 = profile.u_max();
  for (int k = 1; k <= 9; ++k) {
    const double lambda = u0 + 0.1 * k * (u1 - u0);
    const double y2 = critical_points(profile, lambda).second;
    for (double delta : {0.05, 0.1, 0.2}) {
      if (delta > y2) continue;
      const WeightedIntegrals w = weighted_integrals(profile, lambda, delta);
      const std::map<std::string, double> p{{"lambda", lambda}, {"delta", delta}};
      out.push_back(make_check("lemmaA.2.Linf", w.linf, 1.0 / ((y2 + delta) * delta), 0, p));
      out.push_back(make_check("lemmaA.2.L2", w.l2, 1.0 / (std::sqrt(delta) * (y2 + delta)), 0, p));
      out.push_back(make_check("lemmaA.2.L1", w.l1, std::log(1.0 + 2.0 * y2 / delta) / y2, 0, p));
      out.push_back(make_check("lemmaA.2.H1", w.h1, 1.0 / (std::pow(delta, 1.5) * (y2 + delta)), 0, p));
    }
  }
  return out;
}

}  // namespace shearstab
