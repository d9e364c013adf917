#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "shearstab/estimate.hpp"

namespace shearstab {

enum class ProfileKind { poiseuille, quartic, custom_coefficients };

ProfileKind parse_profile_kind(const std::string& s);
std::string to_string(ProfileKind k);

/// Symmetric background shear U(y) on [-1,1], stored as an even polynomial of
/// degree at most 8 so that all derivatives are exact.
class FlowProfile {
 public:
  static constexpr int max_degree = 8;

  FlowProfile(std::string name, std::vector<double> coefficients);

  const std::string& name() const { return name_; }
  /// Power-basis coefficients c_0..c_8.
  const std::array<double, max_degree + 1>& coefficients() const { return c_; }

  double derivative(int order, double y) const;
  double u(double y) const { return derivative(0, y); }
  double du(double y) const { return derivative(1, y); }
  double d2u(double y) const { return derivative(2, y); }
  double d3u(double y) const { return derivative(3, y); }
  double d4u(double y) const { return derivative(4, y); }

  double u_min() const { return u(0.0); }
  double u_max() const { return u(1.0); }
  /// min and max of U'' over a dense sample of [-1,1].
  double inf_d2u() const { return inf_d2u_; }
  double sup_d2u() const { return sup_d2u_; }

  /// Debug table of (y, U, U', U'') with `points` rows.
  std::string table(int points) const;

 private:
  std::string name_;
  std::array<double, max_degree + 1> c_{};
  double inf_d2u_ = 0.0;
  double sup_d2u_ = 0.0;
};

/// poiseuille ignores params; quartic takes {c4} (default 0.5);
/// custom-coefficients takes power coefficients c_0, c_1, ... (odd must vanish).
FlowProfile make_profile(ProfileKind kind, std::span<const double> params = {});

/// Roots y1 = -y2 <= 0 <= y2 of U(y) = lambda for lambda in [U(0), U(1)].
std::pair<double, double> critical_points(const FlowProfile& profile,
                                          double lambda);

struct CriticalLayer {
  double lambda = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
  double delta = 0.0;
  double theta = 0.0;
  bool degenerate = false;  // lambda == U(0), y1 = y2 = 0
};

/// delta <= 0 selects y2/2, theta <= 0 selects (y2-y1)/4.
CriticalLayer make_critical_layer(const FlowProfile& profile, double lambda,
                                  double delta = 0.0, double theta = 0.0);

/// C^1 cubic Hermite ramp, 0 for s <= 0 and 1 for s >= 1.
double smoothstep(double s);
double smoothstep_derivative(double s);

/// Indicator of [y1, y2] and its complement.
double chi(const CriticalLayer& layer, double y);
double chi_c(const CriticalLayer& layer, double y);

/// Exterior cutoff: 0 on (y1-delta/2, y2+delta/2), 1 outside (y1-delta, y2+delta).
double rho_exterior(const CriticalLayer& layer, double y);
double rho_exterior_derivative(const CriticalLayer& layer, double y);
/// Interior cutoff: 1 on (y1+delta, y2-delta), 0 outside (y1+delta/2, y2-delta/2).
double rho_interior(const CriticalLayer& layer, double y);
double rho_interior_derivative(const CriticalLayer& layer, double y);

/// Norms of 1/(U-lambda) and U'/(U-lambda)^2 away from the critical points.
struct WeightedIntegrals {
  double linf = 0.0;     // ||1/(U-l)||_{L^inf}
  double l2 = 0.0;       // ||1/(U-l)||_{L^2}
  double l1 = 0.0;       // ||1/(U-l)||_{L^1}
  double h1 = 0.0;       // ||U'/(U-l)^2||_{L^2}
};

WeightedIntegrals weighted_integrals(const FlowProfile& profile, double lambda,
                                     double delta);

std::vector<EstimateCheck> profile_asymptotics_check(const FlowProfile& profile);

}  // namespace shearstab
