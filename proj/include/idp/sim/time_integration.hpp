#pragma once

#include <functional>
#include <stdexcept>

#include "idp/dg/solution.hpp"

namespace idp::sim {

/// dU/dt = L(U, t).
using Operator = std::function<void(const dg::DGSolution&, double, dg::DGSolution&)>;
/// Called after every stage with the 1-based stage index.
using StageHook = std::function<void(dg::DGSolution&, int)>;

namespace detail {

// out = a x + b y + c z (coefficient vectors).
inline void combine(dg::DGSolution& out, double a, const dg::DGSolution& x, double b,
                    const dg::DGSolution& y, double c = 0.0, const dg::DGSolution* z = nullptr) {
  if (x.coeffs.size() != y.coeffs.size()) throw std::invalid_argument("combine: size mismatch");
  if (out.coeffs.size() != x.coeffs.size()) out = x;
  for (std::size_t i = 0; i < x.coeffs.size(); ++i) {
    double v = a * x.coeffs[i] + b * y.coeffs[i];
    if (z) v += c * z->coeffs[i];
    out.coeffs[i] = v;
  }
}

}  // namespace detail

/// Three-stage SSP-RK3 in convex-combination form:
/// U1 = U + dt L(U); U2 = 3/4 U + 1/4 (U1 + dt L(U1));
/// U^{n+1} = 1/3 U + 2/3 (U2 + dt L(U2)).
inline void step_ssprk3(dg::DGSolution& u, double t, double dt, const Operator& L, const StageHook& hook) {
  dg::DGSolution k = u, s1 = u, s2 = u, tmp = u;
  L(u, t, k);
  detail::combine(s1, 1.0, u, dt, k);
  if (hook) hook(s1, 1);
  L(s1, t + dt, k);
  detail::combine(tmp, 1.0, s1, dt, k);
  detail::combine(s2, 0.75, u, 0.25, tmp);
  if (hook) hook(s2, 2);
  L(s2, t + 0.5 * dt, k);
  detail::combine(tmp, 1.0, s2, dt, k);
  detail::combine(u, 1.0 / 3.0, u, 2.0 / 3.0, tmp);
  if (hook) hook(u, 3);
}

/// Classical RK4 with stage values U2 = U + dt/2 L(U), U3 = U + dt/2 L(U2),
/// U4 = U + dt L(U3) and the 1/6, 1/3, 1/3, 1/6 update.
inline void step_rk4(dg::DGSolution& u, double t, double dt, const Operator& L, const StageHook& hook) {
  dg::DGSolution k1 = u, k2 = u, k3 = u, k4 = u, s = u;
  L(u, t, k1);
  detail::combine(s, 1.0, u, 0.5 * dt, k1);
  if (hook) hook(s, 1);
  L(s, t + 0.5 * dt, k2);
  detail::combine(s, 1.0, u, 0.5 * dt, k2);
  if (hook) hook(s, 2);
  L(s, t + 0.5 * dt, k3);
  detail::combine(s, 1.0, u, dt, k3);
  if (hook) hook(s, 3);
  L(s, t + dt, k4);
  for (std::size_t i = 0; i < u.coeffs.size(); ++i)
    u.coeffs[i] += dt * (k1.coeffs[i] + 2.0 * k2.coeffs[i] + 2.0 * k3.coeffs[i] + k4.coeffs[i]) / 6.0;
  if (hook) hook(u, 4);
}

}  // namespace idp::sim
