#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace idp {

/// Real roots of x^3 + p x + q = 0. Repeated roots are reported once, so a
/// triple root gives one entry and a double root gives two.
struct CubicRoots {
  enum class Kind { Triple, OneReal, DoubleAndSimple, ThreeDistinct };

  std::array<double, 3> roots{};
  std::size_t count = 0;
  Kind kind = Kind::OneReal;

  const double* begin() const { return roots.data(); }
  const double* end() const { return roots.data() + count; }
};

namespace detail {

// One guarded Newton step: kept only when it lowers the residual.
inline double polish_cubic_root(double x, double p, double q) {
  for (int it = 0; it < 2; ++it) {
    const double f = (x * x + p) * x + q;
    const double df = 3.0 * x * x + p;
    if (df == 0.0 || !std::isfinite(f)) break;
    const double y = x - f / df;
    const double fy = (y * y + p) * y + q;
    if (!(std::abs(fy) < std::abs(f))) break;
    x = y;
  }
  return x;
}

}  // namespace detail

/// Classifies by the sign of 4p^3 + 27q^2 and uses closed-form real formulas:
/// Cardano with real cube roots for one root, the 3q/p and -3q/(2p) pair for
/// a double root, and the trigonometric form for three distinct roots.
inline CubicRoots solve_depressed_cubic(double p, double q) {
  CubicRoots r;
  if (p == 0.0 && q == 0.0) {
    r.kind = CubicRoots::Kind::Triple;
    r.roots[0] = 0.0;
    r.count = 1;
    return r;
  }
  const double disc = 4.0 * p * p * p + 27.0 * q * q;
  if (disc > 0.0) {
    r.kind = CubicRoots::Kind::OneReal;
    // s from disc itself: recomputing 12p^3 + 81q^2 can round below zero
    // next to the double-root boundary. The smaller Cardano term comes from
    // y1 y2 = -27 p^3 instead of the cancelling difference.
    const double s = std::sqrt(3.0 * disc);
    const double big = 1.5 * (9.0 * q + std::copysign(s, q));
    const double cb = std::cbrt(big);
    double x = -(cb + (cb != 0.0 ? -3.0 * p / cb : 0.0)) / 3.0;
    r.roots[0] = detail::polish_cubic_root(x, p, q);
    r.count = 1;
    return r;
  }
  if (disc == 0.0) {
    r.kind = CubicRoots::Kind::DoubleAndSimple;
    r.roots[0] = 3.0 * q / p;
    r.roots[1] = -1.5 * q / p;
    r.count = 2;
    return r;
  }
  // disc < 0 implies p < 0.
  r.kind = CubicRoots::Kind::ThreeDistinct;
  const double sq = std::sqrt(-3.0 * p);
  double arg = -3.0 * std::numbers::sqrt3 * q / (2.0 * p * std::sqrt(-p));
  arg = std::fmin(1.0, std::fmax(-1.0, arg));
  const double third = std::acos(arg) / 3.0;
  const double c = std::cos(third);
  const double s = std::numbers::sqrt3 * std::sin(third);
  r.roots[0] = detail::polish_cubic_root(-2.0 * sq / 3.0 * c, p, q);
  r.roots[1] = detail::polish_cubic_root(sq / 3.0 * (c + s), p, q);
  r.roots[2] = detail::polish_cubic_root(sq / 3.0 * (c - s), p, q);
  r.count = 3;
  return r;
}

}  // namespace idp
