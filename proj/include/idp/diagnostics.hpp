#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace idp {

struct GeometricFit {
  double rate = std::numeric_limits<double>::quiet_NaN();  // residual ratio per iteration
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
};

/// Least-squares line through log(residual) against iteration index over the
/// last `window` positive entries. A good fit with rate < 1 indicates
/// asymptotic linear convergence. Needs at least three points.
inline GeometricFit geometric_tail_fit(std::span<const double> history, int window = 10) {
  std::vector<double> ks, ys;
  for (std::size_t i = history.size(); i-- > 0 && static_cast<int>(ys.size()) < window;) {
    if (history[i] > 0.0 && std::isfinite(history[i])) {
      ks.push_back(static_cast<double>(i));
      ys.push_back(std::log(history[i]));
    }
  }
  GeometricFit fit;
  fit.points = static_cast<int>(ys.size());
  if (fit.points < 3) return fit;
  const double n = fit.points;
  double mk = 0, my = 0;
  for (int i = 0; i < fit.points; ++i) {
    mk += ks[i] / n;
    my += ys[i] / n;
  }
  double skk = 0, sky = 0, syy = 0;
  for (int i = 0; i < fit.points; ++i) {
    skk += (ks[i] - mk) * (ks[i] - mk);
    sky += (ks[i] - mk) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sky / skk;
  fit.rate = std::exp(slope);
  fit.r_squared = syy > 0.0 ? (sky * sky) / (skk * syy) : 1.0;
  return fit;
}

}  // namespace idp
