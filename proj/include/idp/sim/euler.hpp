#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "idp/dg/solution.hpp"
#include "idp/state.hpp"

namespace idp::sim {

using State4 = std::array<double, 4>;  // rho, mx, my, E

/// Physical flux F(U) . n for unit normal n.
inline State4 euler_flux(const State4& u, double nx, double ny, double gamma_gas) {
  const double rho = u[0];
  const double vx = u[1] / rho, vy = u[2] / rho;
  const double p = (gamma_gas - 1.0) * (u[3] - 0.5 * (u[1] * vx + u[2] * vy));
  const double vn = vx * nx + vy * ny;
  return {rho * vn, u[1] * vn + p * nx, u[2] * vn + p * ny, (u[3] + p) * vn};
}

inline double max_wave_speed(const State4& u, double nx, double ny, double gamma_gas) {
  const double rho = u[0];
  const double vx = u[1] / rho, vy = u[2] / rho;
  const double p = (gamma_gas - 1.0) * (u[3] - 0.5 * (u[1] * vx + u[2] * vy));
  return std::abs(vx * nx + vy * ny) + std::sqrt(gamma_gas * std::max(p, 0.0) / rho);
}

/// Local Lax-Friedrichs flux with the larger trace wave speed.
inline State4 lax_friedrichs_flux(const State4& um, const State4& up, double nx, double ny,
                                  double gamma_gas) {
  const State4 fm = euler_flux(um, nx, ny, gamma_gas);
  const State4 fp = euler_flux(up, nx, ny, gamma_gas);
  const double lam = std::max(max_wave_speed(um, nx, ny, gamma_gas), max_wave_speed(up, nx, ny, gamma_gas));
  if (!std::isfinite(lam)) {
    std::ostringstream os;
    os << "non-finite wave speed at face: U- = (" << um[0] << ", " << um[1] << ", " << um[2] << ", "
       << um[3] << "), U+ = (" << up[0] << ", " << up[1] << ", " << up[2] << ", " << up[3] << ")";
    throw std::runtime_error(os.str());
  }
  State4 f;
  for (int c = 0; c < 4; ++c) f[c] = 0.5 * (fm[c] + fp[c]) - 0.5 * lam * (up[c] - um[c]);
  return f;
}

enum class BoundaryKind { Periodic, Reflective, Outflow, Inflow };

/// Boundary treatment of one domain edge. Inflow states are conserved
/// variables as a function of (x, y, t).
struct EdgeCondition {
  BoundaryKind kind = BoundaryKind::Periodic;
  std::function<State4(double, double, double)> inflow;
};

/// Edges in the order left, right, bottom, top.
struct BoundarySet {
  std::array<EdgeCondition, 4> edge;

  static BoundarySet periodic() { return {}; }
  void validate() const {
    const bool px = edge[0].kind == BoundaryKind::Periodic, px2 = edge[1].kind == BoundaryKind::Periodic;
    const bool py = edge[2].kind == BoundaryKind::Periodic, py2 = edge[3].kind == BoundaryKind::Periodic;
    if (px != px2 || py != py2) throw std::invalid_argument("periodic edges must come in pairs");
    for (const auto& e : edge)
      if (e.kind == BoundaryKind::Inflow && !e.inflow)
        throw std::invalid_argument("inflow edge without a state function");
  }
};

/// Ghost state across an edge with outward normal (nx, ny).
inline State4 ghost_state(const EdgeCondition& e, const State4& inside, double nx, double ny, double x,
                          double y, double t) {
  switch (e.kind) {
    case BoundaryKind::Reflective: {
      const double mn = inside[1] * nx + inside[2] * ny;
      return {inside[0], inside[1] - 2.0 * mn * nx, inside[2] - 2.0 * mn * ny, inside[3]};
    }
    case BoundaryKind::Outflow: return inside;
    case BoundaryKind::Inflow: return e.inflow(x, y, t);
    case BoundaryKind::Periodic: break;
  }
  throw std::logic_error("ghost_state: periodic edges have no ghost");
}

/// Source term S(x, y, t) added to the right-hand side.
using SourceFn = std::function<State4(double, double, double)>;

/// Semi-discrete DG operator dU/dt = L(U) for the 2D Euler equations on a
/// uniform square mesh. Works for any 2D reference basis.
class EulerDG2D {
 public:
  EulerDG2D(BoundarySet bc, double gamma_gas, SourceFn source = {})
      : bc_(std::move(bc)), gamma_(gamma_gas), source_(std::move(source)) {
    bc_.validate();
  }

  const BoundarySet& boundary() const { return bc_; }
  double gamma_gas() const { return gamma_; }

  void rhs(const dg::DGSolution& u, double t, dg::DGSolution& out) const {
    const dg::ReferenceBasis& b = *u.basis;
    if (b.dim != 2 || u.n_comp != 4) throw std::invalid_argument("EulerDG2D: need a 2D Euler solution");
    if (out.coeffs.size() != u.coeffs.size()) out = u;
    std::fill(out.coeffs.begin(), out.coeffs.end(), 0.0);
    const std::size_t nb = b.n_basis, nq = b.vol_points.size(), nf = b.n_face_points();
    const double h = u.h;

    // Volume terms: 2/h * sum_q w_q (F_x dphi/dxi + F_y dphi/deta).
    std::vector<State4> uq(nq);
    for (std::size_t cell = 0; cell < u.n_cells(); ++cell) {
      evaluate(u, b.vol, cell, uq);
      const auto ctr = u.cell_center(cell);
      for (std::size_t q = 0; q < nq; ++q) {
        const State4 fx = euler_flux(uq[q], 1.0, 0.0, gamma_);
        const State4 fy = euler_flux(uq[q], 0.0, 1.0, gamma_);
        State4 src{};
        if (source_)
          src = source_(ctr[0] + 0.5 * h * b.vol_points[q][0], ctr[1] + 0.5 * h * b.vol_points[q][1], t);
        const double w = b.vol_weights[q];
        for (int c = 0; c < 4; ++c) {
          double* o = out.coeffs.data() + (cell * 4 + c) * nb;
          const double a = w * 2.0 / h * fx[c], bb = w * 2.0 / h * fy[c], s = w * src[c];
          for (std::size_t j = 0; j < nb; ++j) o[j] += a * b.grad[0](q, j) + bb * b.grad[1](q, j) + s * b.vol(q, j);
        }
      }
    }

    // Faces: subtract 1/h * sum_p w_p Fhat.n phi_j on each side.
    std::vector<State4> um(nf), up(nf);
    std::vector<State4> flux(nf);
    const std::size_t nx = u.nx, ny = u.ny;
    // Vertical faces x = x0 + i h, between cells (i-1, j) and (i, j).
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i <= nx; ++i) {
        const bool left_edge = i == 0, right_edge = i == nx;
        const bool periodic = bc_.edge[0].kind == BoundaryKind::Periodic;
        if (right_edge && periodic) continue;
        const std::size_t cl = j * nx + (left_edge ? (periodic ? nx - 1 : 0) : i - 1);
        const std::size_t cr = j * nx + (right_edge ? nx - 1 : i);
        const double xf = u.box[0] + static_cast<double>(i) * h;
        const double yc = u.box[2] + (j + 0.5) * h;
        if (left_edge && !periodic) {
          evaluate(u, b.face[0], cr, up);
          for (std::size_t p = 0; p < nf; ++p)
            um[p] = ghost_state(bc_.edge[0], up[p], -1.0, 0.0, xf, yc + 0.5 * h * b.face_tangent[0][p], t);
          face_flux(um, up, 1.0, 0.0, flux);
          accumulate(out, b.face[0], cr, flux, b.face_weights, +1.0 / h);
        } else if (right_edge) {
          evaluate(u, b.face[1], cl, um);
          for (std::size_t p = 0; p < nf; ++p)
            up[p] = ghost_state(bc_.edge[1], um[p], 1.0, 0.0, xf, yc + 0.5 * h * b.face_tangent[1][p], t);
          face_flux(um, up, 1.0, 0.0, flux);
          accumulate(out, b.face[1], cl, flux, b.face_weights, -1.0 / h);
        } else {
          evaluate(u, b.face[1], cl, um);
          evaluate(u, b.face[0], cr, up);
          face_flux(um, up, 1.0, 0.0, flux);
          accumulate(out, b.face[1], cl, flux, b.face_weights, -1.0 / h);
          accumulate(out, b.face[0], cr, flux, b.face_weights, +1.0 / h);
        }
      }
    // Horizontal faces y = y0 + j h, between cells (i, j-1) and (i, j).
    for (std::size_t j = 0; j <= ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const bool bottom_edge = j == 0, top_edge = j == ny;
        const bool periodic = bc_.edge[2].kind == BoundaryKind::Periodic;
        if (top_edge && periodic) continue;
        const std::size_t cb = (bottom_edge ? (periodic ? ny - 1 : 0) : j - 1) * nx + i;
        const std::size_t ct = (top_edge ? ny - 1 : j) * nx + i;
        const double yf = u.box[2] + static_cast<double>(j) * h;
        const double xc = u.box[0] + (i + 0.5) * h;
        if (bottom_edge && !periodic) {
          evaluate(u, b.face[2], ct, up);
          for (std::size_t p = 0; p < nf; ++p)
            um[p] = ghost_state(bc_.edge[2], up[p], 0.0, -1.0, xc + 0.5 * h * b.face_tangent[2][p], yf, t);
          face_flux(um, up, 0.0, 1.0, flux);
          accumulate(out, b.face[2], ct, flux, b.face_weights, +1.0 / h);
        } else if (top_edge) {
          evaluate(u, b.face[3], cb, um);
          for (std::size_t p = 0; p < nf; ++p)
            up[p] = ghost_state(bc_.edge[3], um[p], 0.0, 1.0, xc + 0.5 * h * b.face_tangent[3][p], yf, t);
          face_flux(um, up, 0.0, 1.0, flux);
          accumulate(out, b.face[3], cb, flux, b.face_weights, -1.0 / h);
        } else {
          evaluate(u, b.face[3], cb, um);
          evaluate(u, b.face[2], ct, up);
          face_flux(um, up, 0.0, 1.0, flux);
          accumulate(out, b.face[3], cb, flux, b.face_weights, -1.0 / h);
          accumulate(out, b.face[2], ct, flux, b.face_weights, +1.0 / h);
        }
      }

    // Diagonal mass.
    for (std::size_t cell = 0; cell < u.n_cells(); ++cell)
      for (int c = 0; c < 4; ++c) {
        double* o = out.coeffs.data() + (cell * 4 + c) * nb;
        for (std::size_t j = 0; j < nb; ++j) o[j] /= b.mass[j];
      }
  }

  /// Largest |u_x| + c plus largest |u_y| + c over cell averages.
  double max_speed_sum(const dg::DGSolution& u) const {
    double sx = 0.0, sy = 0.0;
    for (std::size_t cell = 0; cell < u.n_cells(); ++cell) {
      State4 s;
      for (int c = 0; c < 4; ++c) s[c] = u.cell_average(cell, c);
      sx = std::max(sx, max_wave_speed(s, 1.0, 0.0, gamma_));
      sy = std::max(sy, max_wave_speed(s, 0.0, 1.0, gamma_));
    }
    if (!std::isfinite(sx + sy)) throw std::runtime_error("non-finite wave speed in cell averages");
    return sx + sy;
  }

 private:
  static void evaluate(const dg::DGSolution& u, const dg::PointTable& t, std::size_t cell,
                       std::vector<State4>& vals) {
    const std::size_t nb = u.n_basis();
    for (std::size_t p = 0; p < t.n_points; ++p) {
      const double* row = t.values.data() + p * nb;
      for (int c = 0; c < 4; ++c) {
        const double* cc = u.coeffs.data() + (cell * 4 + c) * nb;
        double s = 0.0;
        for (std::size_t j = 0; j < nb; ++j) s += row[j] * cc[j];
        vals[p][c] = s;
      }
    }
  }

  void face_flux(const std::vector<State4>& um, const std::vector<State4>& up, double nx, double ny,
                 std::vector<State4>& f) const {
    for (std::size_t p = 0; p < um.size(); ++p) f[p] = lax_friedrichs_flux(um[p], up[p], nx, ny, gamma_);
  }

  // out_j += sign * sum_p w_p f_p phi_j(p); sign carries the outward normal
  // orientation relative to the flux direction and the 1/h factor.
  static void accumulate(dg::DGSolution& out, const dg::PointTable& t, std::size_t cell,
                         const std::vector<State4>& f, const std::vector<double>& w, double sign) {
    const std::size_t nb = out.n_basis();
    for (std::size_t p = 0; p < t.n_points; ++p) {
      const double* row = t.values.data() + p * nb;
      for (int c = 0; c < 4; ++c) {
        double* o = out.coeffs.data() + (cell * 4 + c) * nb;
        const double a = sign * w[p] * f[p][c];
        for (std::size_t j = 0; j < nb; ++j) o[j] += a * row[j];
      }
    }
  }

  BoundarySet bc_;
  double gamma_;
  SourceFn source_;
};

}  // namespace idp::sim
