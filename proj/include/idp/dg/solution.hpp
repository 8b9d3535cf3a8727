#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "idp/dg/basis.hpp"
#include "idp/field.hpp"
#include "idp/state.hpp"

namespace idp::dg {

/// Per-cell polynomial coefficients on a uniform nx x ny mesh (ny = 1 in 1D).
/// Cell (i, j) has index j * nx + i. Coefficients are stored as
/// [cell][component][basis].
struct DGSolution {
  std::shared_ptr<const ReferenceBasis> basis;
  std::size_t nx = 0, ny = 1;
  int n_comp = 1;
  double h = 1.0;
  std::array<double, 4> box{};  // x0, x1, y0, y1 (y entries unused in 1D)
  double gamma_gas = 1.4;
  std::vector<double> coeffs;

  DGSolution() = default;
  DGSolution(std::shared_ptr<const ReferenceBasis> b, std::size_t nx_, std::size_t ny_, int comps,
             std::array<double, 4> box_, double gamma = 1.4)
      : basis(std::move(b)), nx(nx_), ny(ny_), n_comp(comps), box(box_), gamma_gas(gamma) {
    if (!basis) throw std::invalid_argument("DGSolution: missing basis");
    if (nx == 0 || ny == 0) throw std::invalid_argument("DGSolution: empty mesh");
    h = (box[1] - box[0]) / static_cast<double>(nx);
    if (basis->dim == 2) {
      const double hy = (box[3] - box[2]) / static_cast<double>(ny);
      if (std::abs(hy - h) > 1e-12 * std::max(1.0, h))
        throw std::invalid_argument("DGSolution: cells must be square");
    } else if (ny != 1) {
      throw std::invalid_argument("DGSolution: 1D mesh must have ny = 1");
    }
    coeffs.assign(n_cells() * n_comp * basis->n_basis, 0.0);
  }

  std::size_t n_cells() const { return nx * ny; }
  std::size_t n_basis() const { return basis->n_basis; }
  int dim() const { return basis->dim; }

  std::span<double> cell_comp(std::size_t cell, int comp) {
    return {coeffs.data() + (cell * n_comp + comp) * n_basis(), n_basis()};
  }
  std::span<const double> cell_comp(std::size_t cell, int comp) const {
    return {coeffs.data() + (cell * n_comp + comp) * n_basis(), n_basis()};
  }

  std::array<double, 2> cell_center(std::size_t cell) const {
    const std::size_t i = cell % nx, j = cell / nx;
    return {box[0] + (i + 0.5) * h, dim() == 2 ? box[2] + (j + 0.5) * h : 0.0};
  }

  double cell_average(std::size_t cell, int comp) const {
    const auto c = cell_comp(cell, comp);
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += basis->mean_weights[j] * c[j];
    return s;
  }

  /// Value of one component at row p of a point table.
  double eval(const PointTable& t, std::size_t p, std::size_t cell, int comp) const {
    const auto c = cell_comp(cell, comp);
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += t(p, j) * c[j];
    return s;
  }

  /// Sets coefficients so the polynomial interpolates (nodal) or is the
  /// discrete L2 projection (modal) of `u(x, y)` under the volume rule.
  template <class F>
  void project_function(F&& u) {
    const ReferenceBasis& b = *basis;
    for (std::size_t cell = 0; cell < n_cells(); ++cell) {
      const auto ctr = cell_center(cell);
      for (int comp = 0; comp < n_comp; ++comp) {
        auto c = cell_comp(cell, comp);
        std::fill(c.begin(), c.end(), 0.0);
      }
      for (std::size_t q = 0; q < b.vol_points.size(); ++q) {
        const double x = ctr[0] + 0.5 * h * b.vol_points[q][0];
        const double y = ctr[1] + 0.5 * h * b.vol_points[q][1];
        const auto v = u(x, y);
        for (int comp = 0; comp < n_comp; ++comp) {
          auto c = cell_comp(cell, comp);
          for (std::size_t j = 0; j < b.n_basis; ++j)
            c[j] += b.vol_weights[q] * b.vol(q, j) * v[comp] / b.mass[j];
        }
      }
    }
  }
};

/// Cell averages as an Euler field (n_comp must be Dim + 2).
template <int Dim>
CellAverageField<Dim> cell_averages(const DGSolution& sol) {
  if (sol.n_comp != Dim + 2) throw std::invalid_argument("cell_averages: component count mismatch");
  std::array<double, 2 * Dim> box{};
  for (int i = 0; i < 2 * Dim; ++i) box[i] = sol.box[i];
  CellAverageField<Dim> f(sol.n_cells(), sol.h, box);
  for (std::size_t i = 0; i < sol.n_cells(); ++i)
    for (int c = 0; c < Dim + 2; ++c) f(i, c) = sol.cell_average(i, c);
  return f;
}

/// Scalar cell averages of component `comp`.
inline std::vector<double> cell_averages_scalar(const DGSolution& sol, int comp = 0) {
  std::vector<double> out(sol.n_cells());
  for (std::size_t i = 0; i < sol.n_cells(); ++i) out[i] = sol.cell_average(i, comp);
  return out;
}

/// Shifts every cell polynomial by (limited - current average) along the
/// constant function; higher modal coefficients are untouched.
inline void postprocess_dg(DGSolution& sol, std::span<const double> limited) {
  if (limited.size() != sol.n_cells() * static_cast<std::size_t>(sol.n_comp))
    throw std::invalid_argument("postprocess_dg: size mismatch");
  const ReferenceBasis& b = *sol.basis;
  // A modal basis whose mean is exactly its first coefficient takes the
  // target directly. Shifting would leave rounding of the old mean's size,
  // enough to push a state projected onto rho e = eps back outside.
  const bool direct = b.one[0] == 1.0 && b.mean_weights[0] == 1.0 &&
                      std::all_of(b.one.begin() + 1, b.one.end(), [](double v) { return v == 0.0; }) &&
                      std::all_of(b.mean_weights.begin() + 1, b.mean_weights.end(), [](double v) { return v == 0.0; });
  for (std::size_t cell = 0; cell < sol.n_cells(); ++cell)
    for (int comp = 0; comp < sol.n_comp; ++comp) {
      const double target = limited[cell * sol.n_comp + comp];
      auto c = sol.cell_comp(cell, comp);
      if (direct) {
        c[0] = target;
        continue;
      }
      // Nodal bases: shift, then fold the rounding residual back in.
      for (int pass = 0; pass < 3; ++pass) {
        const double shift = target - sol.cell_average(cell, comp);
        if (shift == 0.0) break;
        for (std::size_t j = 0; j < c.size(); ++j)
          if (b.one[j] != 0.0) c[j] += shift * b.one[j];
      }
    }
}

template <int Dim>
void postprocess_dg(DGSolution& sol, const CellAverageField<Dim>& limited) {
  postprocess_dg(sol, limited.values());
}

struct ScalingStats {
  std::size_t cells_density_scaled = 0;
  std::size_t cells_energy_scaled = 0;
  double min_theta = 1.0;
};

namespace detail {

// c_j <- theta c_j + (1 - theta) avg one_j for the listed components.
inline void scale_about_mean(DGSolution& sol, std::size_t cell, int comp, double avg, double theta) {
  auto c = sol.cell_comp(cell, comp);
  const auto& one = sol.basis->one;
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = theta * c[j] + (1.0 - theta) * avg * one[j];
}

template <int Dim>
ConservedState<Dim> point_state(const DGSolution& sol, std::size_t p, std::size_t cell) {
  ConservedState<Dim> s;
  for (int c = 0; c < Dim + 2; ++c) s.q[c] = sol.eval(sol.basis->check, p, cell, c);
  return s;
}

// Largest t in [0, 1] with Ubar + t d admissible, where Ubar is admissible
// and Ubar + d is not. Uses 2 rho E - |m|^2 - 2 eps rho = A t^2 + B t + C.
template <int Dim>
double energy_line_search(const ConservedState<Dim>& avg, const ConservedState<Dim>& pt,
                          const AdmissibleSet& g) {
  ConservedState<Dim> d;
  for (int c = 0; c < Dim + 2; ++c) d.q[c] = pt.q[c] - avg.q[c];
  const double eps = g.epsilon;
  double mm = 0.0, md = 0.0, dd = 0.0;
  for (int i = 0; i < Dim; ++i) {
    mm += avg.momentum(i) * avg.momentum(i);
    md += avg.momentum(i) * d.momentum(i);
    dd += d.momentum(i) * d.momentum(i);
  }
  const double A = 2.0 * d.rho() * d.energy() - dd;
  const double B = 2.0 * (avg.rho() * d.energy() + d.rho() * avg.energy()) - 2.0 * md - 2.0 * eps * d.rho();
  const double C = 2.0 * avg.rho() * avg.energy() - mm - 2.0 * eps * avg.rho();

  // The function is C >= 0 at t = 0 and negative at t = 1; take the first
  // crossing in (0, 1].
  double t = 0.0;
  if (std::abs(A) <= 1e-14 * (std::abs(B) + std::abs(C))) {
    t = B < 0.0 ? -C / B : 0.0;
  } else {
    const double disc = B * B - 4.0 * A * C;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double qq = -0.5 * (B + (B >= 0.0 ? sq : -sq));
      double r1 = qq / A, r2 = qq != 0.0 ? C / qq : r1;
      if (r1 > r2) std::swap(r1, r2);
      t = (r1 >= 0.0 && r1 <= 1.0) ? r1 : ((r2 >= 0.0 && r2 <= 1.0) ? r2 : 0.0);
    }
  }
  t = std::clamp(t, 0.0, 1.0);

  auto ok = [&](double s) {
    ConservedState<Dim> u;
    for (int c = 0; c < Dim + 2; ++c) u.q[c] = avg.q[c] + s * d.q[c];
    return in_admissible_set(u, g);
  };
  if (ok(t)) return t;
  // Rounding pushed the root just outside; back off, then bisect if needed.
  for (int k = 0; k < 8; ++k) {
    t *= 1.0 - 1e-14 * (1 << (2 * k));
    if (ok(t)) return t;
  }
  double lo = 0.0, hi = t;
  for (int k = 0; k < 200 && hi - lo > 1e-16; ++k) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace detail

/// Rescales each cell polynomial about its (admissible) average so every
/// checked point value lands in G^eps: first the density deviations, then all
/// components. Cell averages are left unchanged.
template <int Dim>
ScalingStats zhang_shu_scaling(DGSolution& sol, const AdmissibleSet& g) {
  if (sol.n_comp != Dim + 2) throw std::invalid_argument("zhang_shu_scaling: component count mismatch");
  const PointTable& pts = sol.basis->check;
  ScalingStats stats;
  const double eps = g.epsilon;
  for (std::size_t cell = 0; cell < sol.n_cells(); ++cell) {
    ConservedState<Dim> avg;
    for (int c = 0; c < Dim + 2; ++c) avg.q[c] = sol.cell_average(cell, c);
    if (!in_admissible_set(avg, g))
      throw std::domain_error("zhang_shu_scaling: cell average outside the admissible set");

    // Density.
    auto min_rho = [&] {
      double r = avg.rho();
      for (std::size_t p = 0; p < pts.n_points; ++p) r = std::min(r, sol.eval(pts, p, cell, 0));
      return r;
    };
    double rmin = min_rho();
    if (rmin < eps) {
      double theta = avg.rho() > rmin ? std::min(1.0, (avg.rho() - eps) / (avg.rho() - rmin)) : 1.0;
      const std::vector<double> saved(sol.cell_comp(cell, 0).begin(), sol.cell_comp(cell, 0).end());
      for (int k = 0; k < 60; ++k) {
        detail::scale_about_mean(sol, cell, 0, avg.rho(), theta);
        if (min_rho() >= eps) break;
        std::copy(saved.begin(), saved.end(), sol.cell_comp(cell, 0).begin());
        theta = k < 50 ? theta * (1.0 - 1e-15 * std::pow(4.0, k)) : 0.0;
        if (k == 59) detail::scale_about_mean(sol, cell, 0, avg.rho(), 0.0);
      }
      ++stats.cells_density_scaled;
      stats.min_theta = std::min(stats.min_theta, theta);
    }

    // Internal energy.
    auto all_ok = [&] {
      for (std::size_t p = 0; p < pts.n_points; ++p)
        if (!in_admissible_set(detail::point_state<Dim>(sol, p, cell), g)) return false;
      return true;
    };
    double theta2 = 1.0;
    for (std::size_t p = 0; p < pts.n_points; ++p) {
      const auto s = detail::point_state<Dim>(sol, p, cell);
      if (!in_admissible_set(s, g)) theta2 = std::min(theta2, detail::energy_line_search(avg, s, g));
    }
    if (theta2 < 1.0) {
      const std::vector<double> saved(sol.coeffs.begin() + cell * sol.n_comp * sol.n_basis(),
                                      sol.coeffs.begin() + (cell + 1) * sol.n_comp * sol.n_basis());
      for (int k = 0; k < 60; ++k) {
        for (int c = 0; c < Dim + 2; ++c) detail::scale_about_mean(sol, cell, c, avg.q[c], theta2);
        if (all_ok()) break;
        std::copy(saved.begin(), saved.end(), sol.coeffs.begin() + cell * sol.n_comp * sol.n_basis());
        theta2 = k < 50 ? theta2 * (1.0 - 1e-15 * std::pow(4.0, k)) : 0.0;
        if (k == 59)
          for (int c = 0; c < Dim + 2; ++c) detail::scale_about_mean(sol, cell, c, avg.q[c], 0.0);
      }
      ++stats.cells_energy_scaled;
      stats.min_theta = std::min(stats.min_theta, theta2);
    }
  }
  return stats;
}

/// Every cell average and every checked point value is in G^eps.
template <int Dim>
bool all_points_admissible(const DGSolution& sol, const AdmissibleSet& g) {
  for (std::size_t cell = 0; cell < sol.n_cells(); ++cell) {
    ConservedState<Dim> avg;
    for (int c = 0; c < Dim + 2; ++c) avg.q[c] = sol.cell_average(cell, c);
    if (!in_admissible_set(avg, g)) return false;
    for (std::size_t p = 0; p < sol.basis->check.n_points; ++p)
      if (!in_admissible_set(detail::point_state<Dim>(sol, p, cell), g)) return false;
  }
  return true;
}

}  // namespace idp::dg
