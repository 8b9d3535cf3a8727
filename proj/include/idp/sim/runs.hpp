#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "idp/dg/basis.hpp"
#include "idp/dg/solution.hpp"
#include "idp/io.hpp"
#include "idp/sim/config.hpp"
#include "idp/sim/euler.hpp"
#include "idp/sim/manufactured.hpp"
#include "idp/sim/pipeline.hpp"
#include "idp/sim/time_integration.hpp"

namespace idp::sim {

enum class Stepper { SSPRK3, RK4 };

struct RunSummary {
  std::string name;
  long steps = 0;
  double t_final = 0.0;
  bool finite = true;
  bool feasible = true;  // every limited stage had admissible averages and point values
  std::array<double, 4> initial_totals{}, final_totals{};
  double mass_drift = 0.0, energy_drift = 0.0;  // relative
  std::size_t invocations = 0;
  std::vector<long> triggered_steps;
  std::vector<long long> projections_per_step;
  int max_iterations = 0;
  double worst_conservation = 0.0;
  double worst_stage_drift = 0.0;
  bool excluded_untouched = true;
  std::size_t scaled_cells = 0;
  double wall_time_s = 0.0;

  nlohmann::json to_json() const {
    return {{"name", name},
            {"steps", steps},
            {"t_final", t_final},
            {"finite", finite},
            {"feasible", feasible},
            {"initial_totals", initial_totals},
            {"final_totals", final_totals},
            {"mass_drift", mass_drift},
            {"energy_drift", energy_drift},
            {"limiter_invocations", invocations},
            {"triggered_steps", triggered_steps},
            {"projections_per_step", projections_per_step},
            {"max_iterations", max_iterations},
            {"worst_conservation_residual", worst_conservation},
            {"worst_stage_drift", worst_stage_drift},
            {"excluded_untouched", excluded_untouched},
            {"scaled_cells", scaled_cells},
            {"wall_time_s", wall_time_s}};
  }
};

inline std::array<double, 4> integral_totals(const dg::DGSolution& sol) {
  std::array<double, 4> t{};
  const auto avg = dg::cell_averages<2>(sol);
  for (int c = 0; c < 4; ++c) t[c] = avg.column_sum(c) * sol.h * sol.h;
  return t;
}

/// Largest directional wave-speed sum over cell averages and inflow states.
inline double global_speed(const EulerDG2D& L, const dg::DGSolution& u, double t) {
  double s = L.max_speed_sum(u);
  const auto& bc = L.boundary();
  for (int e = 0; e < 4; ++e) {
    if (bc.edge[e].kind != BoundaryKind::Inflow) continue;
    const std::size_t n = e < 2 ? u.ny : u.nx;
    for (std::size_t k = 0; k < n; ++k)
      for (double tau : u.basis->face_tangent[e]) {
        double x, y;
        if (e < 2) {
          x = e == 0 ? u.box[0] : u.box[1];
          y = u.box[2] + (k + 0.5 + 0.5 * tau) * u.h;
        } else {
          x = u.box[0] + (k + 0.5 + 0.5 * tau) * u.h;
          y = e == 2 ? u.box[2] : u.box[3];
        }
        const State4 g = bc.edge[e].inflow(x, y, t);
        s = std::max(s, max_wave_speed(g, 1, 0, L.gamma_gas()) + max_wave_speed(g, 0, 1, L.gamma_gas()));
      }
  }
  return s;
}

inline void write_snapshot(const std::filesystem::path& dir, const dg::DGSolution& sol, long step, double t,
                           double epsilon) {
  std::ostringstream name;
  name << "step_" << std::setw(6) << std::setfill('0') << step << ".csv";
  write_field(dir / name.str(), dg::cell_averages<2>(sol), epsilon,
              {{"nx", sol.nx}, {"ny", sol.ny}, {"time", t}, {"step", step}, {"layout", "row-major, x fastest"}});
}

/// Advances a 2D Euler DG solution to cfg.t_end with the positivity pipeline
/// after every stage (and on the initial data). Snapshots and the audit log go
/// under cfg.out_dir when it is set.
inline RunSummary run_euler_2d(dg::DGSolution& sol, const EulerDG2D& L, Stepper stepper, const SimConfig& cfg,
                               const std::string& name) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  LimiterOptions lopts = cfg.limiter;
  lopts.set = AdmissibleSet(cfg.epsilon, cfg.gamma_gas);
  lopts.solver.h_mesh = sol.h;
  lopts.solver.dim = 2;
  LimiterPipeline pipe(lopts, cfg.cell_average_limiter);
  JsonlWriter audit;
  std::filesystem::path snaps;
  if (!cfg.out_dir.empty()) {
    snaps = cfg.out_dir / "snapshots";
    std::filesystem::create_directories(snaps);
    audit.open(cfg.out_dir / "audit.jsonl");
    pipe.set_audit(&audit);
  }

  RunSummary rs;
  rs.name = name;
  auto check_stage = [&](dg::DGSolution& u, int stage) {
    pipe(u, stage);
    for (double v : u.coeffs)
      if (!std::isfinite(v)) {
        rs.finite = false;
        throw std::runtime_error(name + ": non-finite coefficient at step " + std::to_string(rs.steps + 1));
      }
    if (!dg::all_points_admissible<2>(u, lopts.set)) rs.feasible = false;
  };
  pipe.set_step(0);
  check_stage(sol, 0);
  rs.initial_totals = integral_totals(sol);
  if (!snaps.empty()) write_snapshot(snaps, sol, 0, 0.0, cfg.epsilon);

  Operator op = [&](const dg::DGSolution& u, double t, dg::DGSolution& out) { L.rhs(u, t, out); };
  double t = 0.0;
  const double t_end = cfg.t_end;
  while (t < t_end * (1.0 - 1e-14)) {
    double dt = cfg.dt ? *cfg.dt : cfg.cfl * sol.h / global_speed(L, sol, t);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::runtime_error(name + ": invalid time step");
    if (t + dt > t_end) dt = t_end - t;
    const std::size_t before = pipe.records().size();
    pipe.set_step(rs.steps + 1);
    if (stepper == Stepper::SSPRK3)
      step_ssprk3(sol, t, dt, op, check_stage);
    else
      step_rk4(sol, t, dt, op, check_stage);
    t += dt;
    ++rs.steps;
    long long proj = 0;
    for (std::size_t k = before; k < pipe.records().size(); ++k) {
      proj += pipe.records()[k].projections;
      rs.max_iterations = std::max(rs.max_iterations, pipe.records()[k].iterations);
    }
    rs.projections_per_step.push_back(proj);
    if (pipe.records().size() > before) rs.triggered_steps.push_back(rs.steps);
    if (!snaps.empty() && cfg.snapshot_every > 0 && rs.steps % cfg.snapshot_every == 0)
      write_snapshot(snaps, sol, rs.steps, t, cfg.epsilon);
  }
  rs.t_final = t;
  rs.final_totals = integral_totals(sol);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  rs.mass_drift = rel(rs.initial_totals[0], rs.final_totals[0]);
  rs.energy_drift = rel(rs.initial_totals[3], rs.final_totals[3]);
  rs.invocations = pipe.records().size();
  rs.worst_conservation = pipe.worst_conservation();
  rs.worst_stage_drift = pipe.worst_stage_drift();
  rs.excluded_untouched = pipe.excluded_always_untouched();
  rs.scaled_cells = pipe.zhang_shu_cells();
  if (!snaps.empty() && (cfg.snapshot_every <= 0 || rs.steps % cfg.snapshot_every != 0))
    write_snapshot(snaps, sol, rs.steps, t, cfg.epsilon);
  rs.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rs;
}

// ---------------------------------------------------------------- Sedov

/// Sedov blast defaults: 40x40 P2 on [0, 1.1]^2, SSP-RK3, CFL 0.2, limiter
/// restricted to cells that are inadmissible or carry internal energy.
inline SimConfig sedov_defaults() {
  SimConfig c;
  c.mesh_n = 40;
  c.cfl = 0.2;
  c.t_end = 0.05;
  c.gamma_gas = 1.4;
  c.epsilon = 1e-13;
  c.degree = 2;
  c.limiter.norm = Norm::L2;
  c.limiter.solver.tol = 1e-13;
  c.limiter.solver.gamma_step = 1e-7;
  c.limiter.restrict_region = true;
  c.limiter.region_threshold = 1e-10;
  return c;
}

inline constexpr double kSedovCornerEnergy = 0.244816;

inline dg::DGSolution sedov_initial(const SimConfig& cfg) {
  auto b = std::make_shared<const dg::ReferenceBasis>(dg::make_modal_pk(cfg.degree));
  dg::DGSolution sol(b, cfg.mesh_n, cfg.mesh_n, 4, {0.0, 1.1, 0.0, 1.1}, cfg.gamma_gas);
  CellAverageField<2> avg(sol.n_cells(), sol.h);
  for (std::size_t i = 0; i < sol.n_cells(); ++i) avg.set_state(i, ConservedState<2>(1.0, {0.0, 0.0}, 1e-12));
  avg(0, 3) = kSedovCornerEnergy / (sol.h * sol.h);
  dg::postprocess_dg(sol, avg);
  return sol;
}

inline BoundarySet sedov_boundary() {
  BoundarySet bc;
  bc.edge[0].kind = BoundaryKind::Reflective;
  bc.edge[2].kind = BoundaryKind::Reflective;
  bc.edge[1].kind = BoundaryKind::Outflow;
  bc.edge[3].kind = BoundaryKind::Outflow;
  return bc;
}

inline RunSummary run_sedov(const SimConfig& cfg, dg::DGSolution* final_state = nullptr) {
  dg::DGSolution sol = sedov_initial(cfg);
  EulerDG2D L(sedov_boundary(), cfg.gamma_gas);
  RunSummary rs = run_euler_2d(sol, L, Stepper::SSPRK3, cfg, "sedov");
  if (final_state) *final_state = std::move(sol);
  return rs;
}

// ---------------------------------------------------------------- jet

inline SimConfig jet_defaults() {
  SimConfig c;
  c.mesh_n = 80;
  c.cfl = 1.0 / 7.0;
  c.t_end = 1e-4;
  c.gamma_gas = 5.0 / 3.0;
  c.epsilon = 1e-8;
  c.degree = 3;
  c.limiter.norm = Norm::L2;
  c.limiter.solver.tol = 1e-8;
  c.limiter.solver.gamma_step = 1e-7;
  c.limiter.restrict_region = false;
  return c;
}

struct JetParameters {
  double rho_ambient = 0.5, p_ambient = 0.4127;
  double rho_jet = 5.0, mx_jet = 4000.0, p_jet = 0.4127;
  double half_width = 0.05;
};

/// Conserved inflow state at the left edge; the jet is given by density,
/// x-momentum and pressure.
inline State4 jet_inflow_state(double y, double gamma_gas, const JetParameters& jp = {}) {
  if (std::abs(y) <= jp.half_width)
    return {jp.rho_jet, jp.mx_jet, 0.0, jp.p_jet / (gamma_gas - 1.0) + 0.5 * jp.mx_jet * jp.mx_jet / jp.rho_jet};
  return {jp.rho_ambient, 0.0, 0.0, jp.p_ambient / (gamma_gas - 1.0)};
}

inline BoundarySet jet_boundary(double gamma_gas) {
  BoundarySet bc;
  bc.edge[0].kind = BoundaryKind::Inflow;
  bc.edge[0].inflow = [gamma_gas](double, double y, double) { return jet_inflow_state(y, gamma_gas); };
  for (int e = 1; e < 4; ++e) bc.edge[e].kind = BoundaryKind::Outflow;
  return bc;
}

inline dg::DGSolution jet_initial(const SimConfig& cfg) {
  auto b = std::make_shared<const dg::ReferenceBasis>(dg::make_nodal_q3());
  dg::DGSolution sol(b, cfg.mesh_n, cfg.mesh_n, 4, {0.0, 1.0, -0.5, 0.5}, cfg.gamma_gas);
  const JetParameters jp;
  const auto q = from_primitive<2>(jp.rho_ambient, {0.0, 0.0}, jp.p_ambient, cfg.gamma_gas).q;
  sol.project_function([&](double, double) { return q; });
  return sol;
}

inline RunSummary run_jet(const SimConfig& cfg, dg::DGSolution* final_state = nullptr) {
  dg::DGSolution sol = jet_initial(cfg);
  EulerDG2D L(jet_boundary(cfg.gamma_gas), cfg.gamma_gas);
  RunSummary rs = run_euler_2d(sol, L, Stepper::RK4, cfg, "jet");
  if (final_state) *final_state = std::move(sol);
  return rs;
}

// ---------------------------------------------------------- convergence

struct ConvergenceRow {
  std::size_t n = 0;
  double dx = 0.0;
  double l2_rho = 0.0, l1_rho = 0.0, l2_u = 0.0, l1_u = 0.0;
  std::size_t invocations = 0;
  int max_iterations = 0;
  bool feasible = true;
  double wall_time_s = 0.0;
};

struct ConvergenceTable {
  int degree = 2;
  Norm norm = Norm::L2;
  std::vector<ConvergenceRow> rows;

  static double rate(double coarse, double fine) { return std::log(coarse / fine) / std::log(2.0); }
  std::vector<double> rates(double ConvergenceRow::*field) const {
    std::vector<double> r;
    for (std::size_t i = 1; i < rows.size(); ++i) r.push_back(rate(rows[i - 1].*field, rows[i].*field));
    return r;
  }

  void write_csv(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << "degree,norm,n,dx,l2_rho,l2_rho_rate,l1_rho,l1_rho_rate,l2_U,l2_U_rate,l1_U,l1_U_rate,"
           "limiter_invocations,max_iterations,feasible,wall_time_s\n"
        << std::setprecision(10);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      auto rt = [&](double ConvergenceRow::*f) -> std::string {
        if (i == 0) return "";
        std::ostringstream os;
        os << std::setprecision(6) << rate(rows[i - 1].*f, r.*f);
        return os.str();
      };
      out << degree << ',' << to_string(norm) << ',' << r.n << ',' << r.dx << ',' << r.l2_rho << ','
          << rt(&ConvergenceRow::l2_rho) << ',' << r.l1_rho << ',' << rt(&ConvergenceRow::l1_rho) << ','
          << r.l2_u << ',' << rt(&ConvergenceRow::l2_u) << ',' << r.l1_u << ',' << rt(&ConvergenceRow::l1_u)
          << ',' << r.invocations << ',' << r.max_iterations << ',' << (r.feasible ? 1 : 0) << ','
          << r.wall_time_s << '\n';
    }
  }
};

/// Defaults of the near-vacuum convergence study.
inline SimConfig convergence_defaults(Norm norm) {
  SimConfig c;
  c.t_end = 0.1;
  c.dt = 5e-4;
  c.gamma_gas = 1.4;
  c.epsilon = 1e-13;
  c.degree = 2;
  c.limiter.norm = norm;
  c.limiter.solver.tol = 1e-13;
  c.limiter.solver.gamma_step = norm == Norm::L1 ? 1e-3 : 1.0;
  return c;
}

inline ConvergenceRow manufactured_run(const SimConfig& cfg, std::size_t n) {
  ManufacturedSolution ms;
  ms.gamma_gas = cfg.gamma_gas;
  auto b = std::make_shared<const dg::ReferenceBasis>(dg::make_modal_pk(cfg.degree));
  dg::DGSolution sol(b, n, n, 4, {0.0, 1.0, 0.0, 1.0}, cfg.gamma_gas);
  sol.project_function([&](double x, double y) { return ms.conserved(x, y, 0.0); });
  EulerDG2D L(BoundarySet::periodic(), cfg.gamma_gas,
              [ms](double x, double y, double t) { return ms.source(x, y, t); });
  SimConfig c = cfg;
  c.mesh_n = n;
  const RunSummary rs = run_euler_2d(sol, L, Stepper::RK4, c, "manufactured");
  ConvergenceRow row;
  row.n = n;
  row.dx = 1.0 / static_cast<double>(n);
  const double T = rs.t_final;
  double s2 = 0.0;
  for (int comp = 0; comp < 4; ++comp) {
    const auto e = dg_errors(sol, [&](double x, double y) { return ms.conserved(x, y, T); }, comp);
    if (comp == 0) {
      row.l2_rho = e[0];
      row.l1_rho = e[1];
    }
    s2 += e[0] * e[0];
    row.l1_u += e[1];
  }
  row.l2_u = std::sqrt(s2);
  row.invocations = rs.invocations;
  row.max_iterations = rs.max_iterations;
  row.feasible = rs.feasible && rs.finite;
  row.wall_time_s = rs.wall_time_s;
  return row;
}

inline ConvergenceTable manufactured_convergence(const SimConfig& cfg,
                                                 const std::vector<std::size_t>& meshes = {25, 50, 100}) {
  ConvergenceTable t;
  t.degree = cfg.degree;
  t.norm = cfg.limiter.norm;
  for (std::size_t n : meshes) {
    SimConfig c = cfg;
    if (!cfg.out_dir.empty()) c.out_dir = cfg.out_dir / ("mesh_" + std::to_string(n));
    t.rows.push_back(manufactured_run(c, n));
  }
  return t;
}

}  // namespace idp::sim
