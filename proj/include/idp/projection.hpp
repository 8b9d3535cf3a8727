#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "idp/cubic.hpp"
#include "idp/state.hpp"

namespace idp {

/// Which KKT active set produced a candidate.
enum class ProjectionCase {
  Case1,           // rho = eps only
  Case2,           // interior, the point itself
  Case3_v0,        // corner (eps, 0, eps)
  Case3_cubic,     // rho = eps and rho e = eps, momentum from the cubic
  Case4_v0,        // (u, 0, eps)
  Case4_quadratic, // rho e = eps only, rho from the quadratic
  Fallback,        // numerical minimization, should never happen
};

template <int Dim>
struct ProjectionCandidate {
  ConservedState<Dim> state;
  ProjectionCase case_id = ProjectionCase::Case2;
  double lambda_kkt = 0.0;
  double mu_kkt = 0.0;
};

/// Process-wide counters: cell projections performed and fallback events.
struct ProjectionDiagnostics {
  std::atomic<std::uint64_t> projections{0};
  std::atomic<std::uint64_t> fallback_events{0};

  void reset() {
    projections.store(0, std::memory_order_relaxed);
    fallback_events.store(0, std::memory_order_relaxed);
  }
};

inline ProjectionDiagnostics& projection_diagnostics() {
  static ProjectionDiagnostics diag;
  return diag;
}

namespace detail {

// A candidate in the reduced coordinates used by the KKT enumeration. The
// second momentum component is carried explicitly (zero in 1D).
struct ReducedCandidate {
  double rho;
  double m1;
  double m2;
  double energy;
  ProjectionCase id;
  double lambda;
  double mu;
};

struct CandidateBuffer {
  std::array<ReducedCandidate, 12> items{};
  std::size_t size = 0;
  void push(const ReducedCandidate& c) {
    if (size < items.size()) items[size++] = c;
  }
};

// Newton refinement of an energy-active candidate on the stationarity
// conditions m (rho + mu) = y1 rho and rho - x = mu a m^2 / (2 rho^2), with
// mu = eps + a m^2 / (2 rho) - z. The closed form for m degenerates to a
// double root near m = y1 / 2; both equations here have derivatives bounded
// away from zero. Steps that do not reduce the residual are rejected.
inline void polish_case4(double x, double y1, double z, double eps, double a, double& rho, double& m) {
  auto residual = [&](double r, double mm) {
    const double mu = eps + a * mm * mm / (2.0 * r) - z;
    const double f = mm * (r + mu) - y1 * r;
    const double h = r - x - mu * a * mm * mm / (2.0 * r * r);
    return std::abs(f) / (std::abs(y1 * r) + std::abs(mm * (r + std::abs(mu))) + 1e-300) +
           std::abs(h) / (std::abs(r) + std::abs(x));
  };
  double best = residual(rho, m);
  for (int it = 0; it < 6 && best > 0.0; ++it) {
    double r = rho, mm = m;
    double mu = eps + a * mm * mm / (2.0 * r) - z;
    mm -= (mm * (r + mu) - y1 * r) / (r + mu + a * mm * mm / r);
    mu = eps + a * mm * mm / (2.0 * r) - z;
    const double q = a * mm * mm / (2.0 * r * r);
    const double dh = 1.0 + 2.0 * mu * q / r + q * q;
    r -= (r - x - mu * q) / dh;
    if (!(r > eps) || !std::isfinite(mm)) break;
    const double next = residual(r, mm);
    if (!(next < best)) break;
    best = next;
    rho = r;
    m = mm;
  }
}

// Candidate enumeration for the projection of (x, y1, y2, z) with
// |y1| >= |y2|. With a = 1 + (y2/y1)^2 the 2D formulas reduce to the 1D
// ones at y2 = 0. Every emitted candidate satisfies rho >= eps - tol and
// rho e = eps (or is the case-1 clamp whose feasibility is checked), so the
// closest one is the projection even if a multiplier filter over-includes.
inline void enumerate_candidates(double x, double y1, double y2, double z, double eps,
                                 CandidateBuffer& out) {
  const double ratio = (y1 != 0.0) ? y2 / y1 : 0.0;
  const double a = 1.0 + ratio * ratio;
  const double scale = std::max({1.0, std::abs(x), std::abs(y1), std::abs(y2), std::abs(z)});
  const double tol = 1e-12 * scale;
  const double vsq = y1 * y1 + y2 * y2;

  // Case 1: density clamp keeps momentum and energy.
  if (x < eps + tol) {
    // z - |y|^2 / (2 eps) >= eps, cleared of the division.
    if (2.0 * eps * z - vsq >= 2.0 * eps * eps - 2.0 * eps * tol)
      out.push({eps, y1, y2, z, ProjectionCase::Case1, eps - x, 0.0});
  }

  auto push_v0_points = [&] {
    if (x < eps + tol && z < eps + tol)
      out.push({eps, 0.0, 0.0, eps, ProjectionCase::Case3_v0, eps - x, eps - z});
    if (x >= eps - tol && z < eps + tol)
      out.push({std::max(x, eps), 0.0, 0.0, eps, ProjectionCase::Case4_v0, 0.0, eps - z});
  };
  if (y1 == 0.0) {
    push_v0_points();
    return;
  }

  // Case 3 with v != 0: a m^3 + (4 eps^2 - 2 eps z) m - 2 eps^2 y1 = 0.
  {
    const double p = (4.0 * eps * eps - 2.0 * eps * z) / a;
    const double q = -2.0 * eps * eps * y1 / a;
    const CubicRoots roots = solve_depressed_cubic(p, q);
    for (double m : roots) {
      if (m == 0.0 || !std::isfinite(m)) continue;
      const double lever = m * (y1 - m);  // > 0  <=>  y1 / m > 1
      const double mu = eps * (y1 / m - 1.0);
      const double lam_term = a * lever / (2.0 * eps);
      const double lambda = eps - x - lam_term;
      if (!(lever > -tol * (std::abs(m) * std::abs(y1) + m * m))) continue;
      if (!(lambda > -tol * (1.0 + std::abs(x) + std::abs(lam_term)))) continue;
      const double energy = a * m * m / (2.0 * eps) + eps;
      out.push({eps, m, ratio * m, energy, ProjectionCase::Case3_cubic, lambda, mu});
    }
  }

  // Case 4 with v != 0: rho from
  //   4K rho^2 - 4 x K rho + 2 x y1^2 (z - eps) - a y1^4 = 0,
  //   K = 2 y1^2 + (eps + x - z)^2 / a,
  // then the momentum from a m^2 - a y1 m + 2 rho^2 - 2 x rho = 0.
  {
    const double s = eps + x - z;
    const double k = 2.0 * y1 * y1 + s * s / a;
    const double c0 = 2.0 * x * y1 * y1 * (z - eps) - a * y1 * y1 * y1 * y1;
    double num = x * x * k - c0;
    const double num_tol = 1e-12 * (x * x * k + std::abs(c0));
    if (k > 0.0 && num >= -num_tol) {
      num = std::max(num, 0.0);
      const double root = 0.5 * std::sqrt(num / k);
      // Stable pair: the larger-magnitude root directly, the other by Vieta.
      const double big = 0.5 * x + (x >= 0.0 ? root : -root);
      const double small = (big != 0.0) ? (c0 / (4.0 * k)) / big : 0.0;
      const std::array<double, 2> rhos{big, small};
      const std::size_t n_rho = (big == small) ? 1 : 2;
      for (std::size_t r = 0; r < n_rho; ++r) {
        const double rho = rhos[r];
        if (!(rho > 0.0) || rho < eps - tol) continue;
        const double rho_c = std::max(rho, eps);
        // rho (rho - x) = -c0 / (4K) on either root; forming it from rho and x
        // cancels badly when the density barely moves.
        const double shift = rho_c == rho ? -c0 / (4.0 * k) : rho_c * (rho_c - x);
        const double t1 = 8.0 * a * std::abs(shift);
        const double t3 = a * a * y1 * y1;
        double delta = t3 - 8.0 * a * shift;
        if (delta < -1e-12 * (t1 + t3)) continue;
        delta = std::max(delta, 0.0);
        const double sd = std::sqrt(delta) / (2.0 * a);
        const double m_big = 0.5 * y1 + (y1 >= 0.0 ? sd : -sd);
        const double prod = 2.0 * shift / a;
        const double m_small = (m_big != 0.0) ? prod / m_big : 0.0;
        const std::array<double, 2> ms{m_big, m_small};
        const std::size_t n_m = (m_big == m_small) ? 1 : 2;
        for (std::size_t j = 0; j < n_m; ++j) {
          const double m = ms[j];
          const double energy = eps + a * m * m / (2.0 * rho_c);
          const double mu = energy - z;
          if (!(mu > -tol)) continue;
          out.push({rho_c, m, ratio * m, energy, ProjectionCase::Case4_quadratic, 0.0, mu});
        }
      }
    }
  }

  // Momentum so small that the cubic root underflows to zero: the v = 0
  // points are admissible and within rounding of the projection.
  if (out.size == 0) push_v0_points();
}

template <int Dim>
ConservedState<Dim> make_state(double rho, double m1, double m2, double energy) {
  ConservedState<Dim> s;
  s.rho() = rho;
  s.momentum(0) = m1;
  if constexpr (Dim == 2) s.momentum(1) = m2;
  s.energy() = energy;
  return s;
}

// Raises rho to eps and E by the internal-energy deficit so that the exact
// membership test passes.
template <int Dim>
void snap_into_set(ConservedState<Dim>& s, const AdmissibleSet& g) {
  if (s.rho() < g.epsilon) s.rho() = g.epsilon;
  if (in_admissible_set(s, g)) return;
  const double needed = g.epsilon + s.momentum_sq() / (2.0 * s.rho());
  if (s.energy() < needed) s.energy() = needed;
  for (int guard = 0; guard < 64 && !in_admissible_set(s, g); ++guard)
    s.energy() = std::nextafter(s.energy(), std::numeric_limits<double>::infinity());
}

template <int Dim>
double squared_distance(const ConservedState<Dim>& a, const ConservedState<Dim>& b) {
  double d = 0.0;
  for (int c = 0; c < Dim + 2; ++c) d += (a.q[c] - b.q[c]) * (a.q[c] - b.q[c]);
  return d;
}

// Projected gradient on the boundary surface rho e = eps parametrized by
// (rho >= eps, m), compared against the density clamp. Only reached when the
// closed-form enumeration yields nothing.
template <int Dim>
ConservedState<Dim> numerical_projection(const ConservedState<Dim>& x, const AdmissibleSet& g) {
  const double eps = g.epsilon;
  auto surface_point = [&](double rho, const std::array<double, Dim>& m) {
    ConservedState<Dim> s;
    s.rho() = rho;
    double msq = 0.0;
    for (int i = 0; i < Dim; ++i) {
      s.momentum(i) = m[i];
      msq += m[i] * m[i];
    }
    s.energy() = eps + msq / (2.0 * rho);
    return s;
  };
  auto objective = [&](double rho, const std::array<double, Dim>& m) {
    return squared_distance(surface_point(rho, m), x);
  };

  double rho = std::max(x.rho(), eps);
  std::array<double, Dim> m{};
  for (int i = 0; i < Dim; ++i) m[i] = x.momentum(i);
  double f = objective(rho, m);
  double step = 0.1;
  for (int it = 0; it < 10000; ++it) {
    const ConservedState<Dim> s = surface_point(rho, m);
    const double de = s.energy() - x.energy();
    double msq = 0.0;
    for (int i = 0; i < Dim; ++i) msq += m[i] * m[i];
    const double g_rho = 2.0 * (rho - x.rho()) - 2.0 * de * msq / (2.0 * rho * rho);
    std::array<double, Dim> g_m{};
    for (int i = 0; i < Dim; ++i) g_m[i] = 2.0 * (m[i] - x.momentum(i)) + 2.0 * de * m[i] / rho;
    double t = step;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const double r_new = std::max(eps, rho - t * g_rho);
      std::array<double, Dim> m_new{};
      for (int i = 0; i < Dim; ++i) m_new[i] = m[i] - t * g_m[i];
      const double f_new = objective(r_new, m_new);
      if (f_new < f) {
        double move = std::abs(r_new - rho);
        for (int i = 0; i < Dim; ++i) move = std::max(move, std::abs(m_new[i] - m[i]));
        rho = r_new;
        m = m_new;
        f = f_new;
        moved = move > 1e-12 * std::max(1.0, std::abs(rho));
        step = std::min(0.1, 2.0 * t);
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  ConservedState<Dim> best = surface_point(rho, m);
  ConservedState<Dim> clamp = x;
  clamp.rho() = eps;
  if (in_admissible_set(clamp, g) && squared_distance(clamp, x) < squared_distance(best, x))
    best = clamp;
  snap_into_set(best, g);
  return best;
}

template <int Dim>
void collect(const ConservedState<Dim>& x, const AdmissibleSet& g, CandidateBuffer& buf,
             bool& swapped) {
  double y1 = x.momentum(0);
  double y2 = 0.0;
  swapped = false;
  if constexpr (Dim == 2) {
    y2 = x.momentum(1);
    // Keep |y1| >= |y2| so a = 1 + (y2/y1)^2 stays in [1, 2].
    if (std::abs(y1) < std::abs(y2)) {
      std::swap(y1, y2);
      swapped = true;
    }
  }
  enumerate_candidates(x.rho(), y1, y2, x.energy(), g.epsilon, buf);
}

template <int Dim>
ConservedState<Dim> to_state(const ReducedCandidate& c, bool swapped) {
  return swapped ? make_state<Dim>(c.rho, c.m2, c.m1, c.energy)
                 : make_state<Dim>(c.rho, c.m1, c.m2, c.energy);
}

}  // namespace detail

/// All KKT candidates for the projection of `x` (empty when `x` is already
/// admissible, where the point itself is the answer).
template <int Dim>
std::vector<ProjectionCandidate<Dim>> projection_candidates(const ConservedState<Dim>& x,
                                                            const AdmissibleSet& g) {
  std::vector<ProjectionCandidate<Dim>> out;
  if (in_admissible_set(x, g)) {
    out.push_back({x, ProjectionCase::Case2, 0.0, 0.0});
    return out;
  }
  detail::CandidateBuffer buf;
  bool swapped = false;
  detail::collect(x, g, buf, swapped);
  for (std::size_t i = 0; i < buf.size; ++i) {
    const auto& c = buf.items[i];
    out.push_back({detail::to_state<Dim>(c, swapped), c.id, c.lambda, c.mu});
  }
  return out;
}

/// Euclidean projection onto G^eps by KKT candidate enumeration. The result
/// always passes the exact membership test.
template <int Dim>
ConservedState<Dim> project(const ConservedState<Dim>& x, const AdmissibleSet& g,
                            ProjectionCase* which = nullptr) {
  auto& diag = projection_diagnostics();
  diag.projections.fetch_add(1, std::memory_order_relaxed);
  if (in_admissible_set(x, g)) {
    if (which) *which = ProjectionCase::Case2;
    return x;
  }
  detail::CandidateBuffer buf;
  bool swapped = false;
  detail::collect(x, g, buf, swapped);

  double best_d = std::numeric_limits<double>::infinity();
  ConservedState<Dim> best;
  ProjectionCase best_id = ProjectionCase::Fallback;
  for (std::size_t i = 0; i < buf.size; ++i) {
    const ConservedState<Dim> s = detail::to_state<Dim>(buf.items[i], swapped);
    const double d = detail::squared_distance(s, x);
    if (d < best_d) {
      best_d = d;
      best = s;
      best_id = buf.items[i].id;
    }
  }
  if (best_id == ProjectionCase::Fallback) {
    diag.fallback_events.fetch_add(1, std::memory_order_relaxed);
    best = detail::numerical_projection(x, g);
  } else {
    // Refine only the winner: distance is flat near the minimizer, so
    // refining every candidate could let a nearly converged loser win.
    if (best_id == ProjectionCase::Case4_quadratic && best.rho() > g.epsilon) {
      double ynorm = 0.0, mnorm = 0.0;
      for (int i = 0; i < Dim; ++i) {
        ynorm += x.momentum(i) * x.momentum(i);
        mnorm += best.momentum(i) * best.momentum(i);
      }
      ynorm = std::sqrt(ynorm);
      mnorm = std::sqrt(mnorm);
      if (ynorm > 0.0 && mnorm > 0.0) {
        double rho = best.rho();
        detail::polish_case4(x.rho(), ynorm, x.energy(), g.epsilon, 1.0, rho, mnorm);
        best.rho() = rho;
        for (int i = 0; i < Dim; ++i) best.momentum(i) = x.momentum(i) * (mnorm / ynorm);
        best.energy() = g.epsilon + mnorm * mnorm / (2.0 * rho);
      }
    }
    detail::snap_into_set(best, g);
  }
  if (which) *which = best_id;
  return best;
}

inline State1 project_1d(double u, double v, double w, const AdmissibleSet& g) {
  return project(State1(u, {v}, w), g);
}

inline State2 project_2d(double u, double v1, double v2, double w, const AdmissibleSet& g) {
  return project(State2(u, {v1, v2}, w), g);
}

/// Max-norm residual of the projection KKT system (stationarity, primal and
/// dual feasibility, complementary slackness) with multipliers reconstructed
/// from the active set, relative to max(1, |input|, |output|).
template <int Dim>
double kkt_residual(const ConservedState<Dim>& input, const ConservedState<Dim>& output,
                    const AdmissibleSet& g) {
  const double eps = g.epsilon;
  double scale = 1.0;
  for (int c = 0; c < Dim + 2; ++c)
    scale = std::max({scale, std::abs(input.q[c]), std::abs(output.q[c])});
  const double act_tol = 1e-9 * scale;

  const double rho = output.rho();
  if (!(rho > 0.0)) return std::numeric_limits<double>::infinity();
  const double msq = output.momentum_sq();
  const double rho_e = output.energy() - msq / (2.0 * rho);

  double res = 0.0;
  res = std::max(res, std::max(0.0, eps - rho));
  res = std::max(res, std::max(0.0, eps - rho_e));

  const bool energy_active = rho_e - eps <= act_tol;
  const bool density_active = rho - eps <= act_tol;

  double mu = 0.0;
  if (energy_active) {
    mu = output.energy() - input.energy();
    res = std::max(res, std::max(0.0, -mu));
    res = std::max(res, std::abs(mu * (rho_e - eps)));
  } else {
    res = std::max(res, std::abs(output.energy() - input.energy()));
  }
  for (int i = 0; i < Dim; ++i) {
    const double m = output.momentum(i);
    res = std::max(res, std::abs(m - input.momentum(i) + mu * m / rho));
  }
  const double rho_eq = rho - input.rho() - mu * msq / (2.0 * rho * rho);
  if (density_active) {
    const double lambda = rho_eq;
    res = std::max(res, std::max(0.0, -lambda));
    res = std::max(res, std::abs(lambda * (rho - eps)));
  } else {
    res = std::max(res, std::abs(rho_eq));
  }
  return res / scale;
}

}  // namespace idp
