#include "shearstab/estimate.hpp"

#include <cmath>
#include <stdexcept>

#include "shearstab/common.hpp"

namespace shearstab {

EstimateCheck make_check(std::string id, double lhs, double rhs, int n,
                         std::map<std::string, double> params) {
  EstimateCheck c;
  c.check_id = std::move(id);
  c.params = std::move(params);
  c.lhs = lhs;
  c.rhs = rhs;
  c.n = n;
  if (rhs > 0.0) {
    c.ratio = lhs / rhs;
  } else {
    c.rhs_zero = true;
    c.ratio = 0.0;
  }
  return c;
}

EstimateCheck skipped_check(std::string id, std::string reason,
                            std::map<std::string, double> params) {
  EstimateCheck c;
  c.check_id = std::move(id);
  c.params = std::move(params);
  c.skipped = true;
  c.note = std::move(reason);
  return c;
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw PreconditionError("fit_line: need at least two matching samples");
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0) throw PreconditionError("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    sse += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  return f;
}

ScalingFit fit_power_law(const std::vector<double>& xs,
                         const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0) || !(ys[i] > 0))
      throw PreconditionError("fit_power_law: values must be positive");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const LineFit lf = fit_line(lx, ly);
  ScalingFit f;
  f.nus = xs;
  f.values = ys;
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.r2 = lf.r2;
  return f;
}

}  // namespace shearstab
