#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace idp::dg {

/// Nodes on [-1, 1] with weights normalized to sum to 1 (averaging measure).
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  // Derivative from (1 - x^2) P_n' = n (P_{n-1} - x P_n), with the endpoint
  // values n(n+1)/2 * (+-1)^{n+1}.
  double dp;
  if (std::abs(std::abs(x) - 1.0) < 1e-15)
    dp = 0.5 * n * (n + 1.0) * ((n % 2 == 0 && x < 0) ? -1.0 : 1.0);
  else
    dp = n * (p0 - x * p1) / (1.0 - x * x);
  return {p1, dp};
}

/// Legendre polynomial scaled to unit norm under the averaging measure dx/2.
inline double orthonormal_legendre(int n, double x) {
  return std::sqrt(2.0 * n + 1.0) * legendre_with_derivative(n, x).first;
}

inline double orthonormal_legendre_derivative(int n, double x) {
  return std::sqrt(2.0 * n + 1.0) * legendre_with_derivative(n, x).second;
}

inline Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre_with_derivative(n, x).second;
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/(...) halved
  }
  return r;
}

/// Four-point Gauss-Lobatto rule: nodes +-1, +-1/sqrt(5).
inline Rule1D gauss_lobatto4() {
  const double a = 1.0 / std::sqrt(5.0);
  return Rule1D{{-1.0, -a, a, 1.0}, {1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0}};
}

}  // namespace idp::dg
