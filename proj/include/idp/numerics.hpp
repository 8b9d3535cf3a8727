#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace idp {

/// Pairwise (cascade) summation; error grows like O(log n) instead of O(n).
inline double pairwise_sum(std::span<const double> x) {
  constexpr std::size_t kBlock = 32;
  if (x.size() <= kBlock) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

/// Strided variant used for columns of row-major fields.
inline double pairwise_sum_strided(const double* first, std::size_t count,
                                   std::size_t stride) {
  constexpr std::size_t kBlock = 32;
  if (count <= kBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += first[i * stride];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum_strided(first, half, stride) +
         pairwise_sum_strided(first + half * stride, count - half, stride);
}

inline double sgn(double a) { return (a > 0.0) - (a < 0.0); }

/// min(max(x, lo), hi).
inline double clip_scalar(double x, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clip_scalar: lower bound exceeds upper bound");
  return std::min(std::max(x, lo), hi);
}

/// Soft thresholding S_gamma(a) = sgn(a) max(|a| - gamma, 0).
inline double shrinkage(double a, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("shrinkage: gamma must be non-negative");
  return sgn(a) * std::max(std::abs(a) - gamma, 0.0);
}

}  // namespace idp
