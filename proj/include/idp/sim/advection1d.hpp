#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "idp/dg/basis.hpp"
#include "idp/dg/solution.hpp"
#include "idp/sim/time_integration.hpp"

namespace idp::sim {

struct AdvectionSetup {
  std::size_t n_cells = 300;
  int degree = 3;
  double x0 = 0.0, x1 = 3.0;
  double dt = 0.001;
  long n_steps = 1000;
};

struct AdvectionRun {
  double h = 0.0;
  std::vector<std::vector<double>> snapshots;  // cell averages after each step
  std::string warning;
};

/// Triangle on (0.25, 0.75] and square on (1.25, 1.75] over a base of 1.
inline double triangle_square(double x) {
  if (x > 0.25 && x <= 0.5) return 4.0 * x;
  if (x > 0.5 && x <= 0.75) return -4.0 * x + 4.0;
  if (x > 1.25 && x <= 1.75) return 2.0;
  return 1.0;
}

/// Upwind modal DG for u_t + u_x = 0 with periodic boundaries.
inline void advection_rhs(const dg::DGSolution& u, dg::DGSolution& out) {
  const dg::ReferenceBasis& b = *u.basis;
  if (out.coeffs.size() != u.coeffs.size()) out = u;
  const std::size_t nb = b.n_basis, n = u.n_cells();
  std::vector<double> right_trace(n);
  for (std::size_t i = 0; i < n; ++i) right_trace[i] = u.eval(b.face[1], 0, i, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto o = out.cell_comp(i, 0);
    const double f_left = right_trace[(i + n - 1) % n];  // upwind from the left neighbour
    const double f_right = right_trace[i];
    for (std::size_t j = 0; j < nb; ++j) {
      double vol = 0.0;
      for (std::size_t q = 0; q < b.vol_points.size(); ++q)
        vol += b.vol_weights[q] * u.eval(b.vol, q, i, 0) * b.grad[0](q, j);
      o[j] = (2.0 * vol - (f_right * b.face[1](0, j) - f_left * b.face[0](0, j))) / (u.h * b.mass[j]);
    }
  }
}

/// Evolves the initial profile without any limiter and records the cell
/// averages after every step.
inline AdvectionRun advect_1d_rkdg(const AdvectionSetup& s,
                                   const std::function<double(double)>& initial = triangle_square) {
  if (s.n_cells < 1 || !(s.dt > 0.0) || s.n_steps < 0) throw std::invalid_argument("advect_1d_rkdg: bad setup");
  auto b = std::make_shared<const dg::ReferenceBasis>(dg::make_modal_pk_1d(s.degree));
  dg::DGSolution u(b, s.n_cells, 1, 1, {s.x0, s.x1, 0.0, 0.0});
  u.project_function([&](double x, double) { return std::array<double, 1>{initial(x)}; });
  AdvectionRun run;
  run.h = u.h;
  const double cfl = s.dt / u.h;
  if (cfl > 1.0 / (2.0 * s.degree + 1.0))
    run.warning = "dt/h = " + std::to_string(cfl) + " exceeds the linear stability estimate 1/(2k+1)";
  Operator op = [](const dg::DGSolution& v, double, dg::DGSolution& o) { advection_rhs(v, o); };
  run.snapshots.reserve(static_cast<std::size_t>(s.n_steps));
  double t = 0.0;
  for (long k = 0; k < s.n_steps; ++k, t += s.dt) {
    step_rk4(u, t, s.dt, op, {});
    run.snapshots.push_back(dg::cell_averages_scalar(u));
  }
  return run;
}

}  // namespace idp::sim
