#pragma once

// Command-line front end. Every subcommand writes report.json under --out with
// the exit status, the defaults version and every effective parameter.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "idp/errors.hpp"
#include "idp/io.hpp"
#include "idp/limiter.hpp"
#include "idp/projection.hpp"
#include "idp/prox.hpp"
#include "idp/sim/config.hpp"
#include "idp/sim/experiments.hpp"
#include "idp/sim/runs.hpp"
#include "idp/splitting.hpp"

namespace idp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSelftestFailed = 1;
inline constexpr int kExitNoConvergence = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitIoOrConfig = 4;

// Bumped whenever a built-in default changes.
inline constexpr const char* kDefaultsVersion = "1.0";

inline const char* to_string(ProjectionCase c) {
  switch (c) {
    case ProjectionCase::Case1: return "density";
    case ProjectionCase::Case2: return "interior";
    case ProjectionCase::Case3_v0: return "corner";
    case ProjectionCase::Case3_cubic: return "density+energy";
    case ProjectionCase::Case4_v0: return "energy_zero_momentum";
    case ProjectionCase::Case4_quadratic: return "energy";
    case ProjectionCase::Fallback: return "fallback";
  }
  return "unknown";
}

/// Raw flag storage; whether a flag was given is asked of CLI11.
struct Flags {
  std::string out = "idp_out";
  std::string config;
  std::string norm = "l2";
  double gamma = 1.0, lambda = 1.0, tol = 1e-13, alpha = 1.0, epsilon = 1e-13;
  double cfl = 0.2, t_end = 0.05, dt = 0.0, amplitude = 1.0;
  int max_iter = 10000;
  bool restrict_region = false;
  std::uint64_t seed = 1;
  std::size_t mesh = 40;
  int degree = 2;
  int snapshot_every = 0;
  int threads = 0;
  std::string format = "json";
  int dim = 0;
  std::vector<double> point;
  std::string in;
  std::vector<std::size_t> meshes;
  std::size_t n_sets = 0;
  std::vector<double> grid;
};

namespace detail {

inline bool given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* o = sub->get_option_no_throw(name);
  return o && o->count() > 0;
}

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Defaults, then the --config file, then explicit flags.
inline sim::SimConfig effective_config(sim::SimConfig cfg, const CLI::App* sub, const Flags& f,
                                       std::map<std::string, std::string>* file_keys = nullptr) {
  if (given(sub, "--config")) {
    const auto kv = sim::read_key_values(f.config);
    sim::apply_key_values(kv, cfg);
    if (file_keys) *file_keys = kv;
  }
  if (given(sub, "--mesh")) cfg.mesh_n = f.mesh;
  if (given(sub, "--cfl")) cfg.cfl = f.cfl;
  if (given(sub, "--t-end")) cfg.t_end = f.t_end;
  if (given(sub, "--dt")) cfg.dt = f.dt;
  if (given(sub, "--epsilon")) cfg.epsilon = f.epsilon;
  if (given(sub, "--degree")) cfg.degree = f.degree;
  if (given(sub, "--norm")) cfg.limiter.norm = parse_norm(f.norm);
  if (given(sub, "--gamma")) cfg.limiter.solver.gamma_step = f.gamma;
  if (given(sub, "--lambda")) cfg.limiter.solver.lambda_relax = f.lambda;
  if (given(sub, "--tol")) cfg.limiter.solver.tol = f.tol;
  if (given(sub, "--max-iter")) cfg.limiter.solver.max_iter = f.max_iter;
  if (given(sub, "--alpha")) cfg.limiter.alpha = f.alpha;
  if (given(sub, "--restrict-region")) cfg.limiter.restrict_region = f.restrict_region;
  if (given(sub, "--seed")) cfg.rng_seed = f.seed;
  if (given(sub, "--snapshot-every")) cfg.snapshot_every = f.snapshot_every;
  if (given(sub, "--out") || cfg.out_dir.empty()) cfg.out_dir = f.out;
  cfg.limiter.set = AdmissibleSet(cfg.epsilon, cfg.gamma_gas);
  if (!(cfg.limiter.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  cfg.validate();
  return cfg;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

/// One row per limited dataset: iteration and projection counts plus the
/// geometric-rate fit, for bar and count plots.
inline void write_records_csv(const std::filesystem::path& path, const sim::LimitingStudy& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "index,iterations_l2,iterations_l1,projections_l2,projections_l1,fit_r2_l2,fit_r2_l1,"
         "fit_rate_l2,fit_rate_l1\n"
      << std::setprecision(10);
  for (const auto& r : s.records)
    out << r.index << ',' << r.iterations_l2 << ',' << r.iterations_l1 << ',' << r.projections_l2 << ','
        << r.projections_l1 << ',' << r.fit_r2_l2 << ',' << r.fit_r2_l1 << ',' << r.fit_rate_l2 << ','
        << r.fit_rate_l1 << '\n';
}

template <int Dim>
nlohmann::json state_json(const ConservedState<Dim>& s) {
  return std::vector<double>(s.q.begin(), s.q.end());
}

struct Context {
  const CLI::App* sub = nullptr;
  Flags flags;
  std::filesystem::path out;
  int threads = 1;
  nlohmann::json report;
};

// ---------------------------------------------------------------- project

template <int Dim>
int run_project(Context& ctx) {
  const Flags& f = ctx.flags;
  const double eps = given(ctx.sub, "--epsilon") ? f.epsilon : 1e-13;
  if (!(eps > 0.0)) throw ConfigError("epsilon must be > 0");
  const AdmissibleSet g(eps);
  ConservedState<Dim> x;
  for (int c = 0; c < Dim + 2; ++c) x.q[c] = f.point[static_cast<std::size_t>(c)];
  const auto fallbacks = projection_diagnostics().fallback_events.load();
  ProjectionCase which{};
  const auto p = project(x, g, &which);
  const double kkt = kkt_residual(x, p, g);
  const bool fell_back = projection_diagnostics().fallback_events.load() != fallbacks;

  ctx.report["parameters"] = {{"dim", Dim}, {"epsilon", eps}, {"point", f.point}};
  ctx.report["results"] = {{"projected", state_json(p)},
                           {"case", to_string(which)},
                           {"kkt_residual", kkt},
                           {"admissible", in_admissible_set(p, g)},
                           {"distance", std::sqrt(idp::detail::squared_distance(p, x))},
                           {"fallback", fell_back}};
  std::cout << std::setprecision(17);
  if (f.format == "csv") {
    std::cout << csv_header(Dim) << ",case,kkt_residual\n";
    for (int c = 0; c < Dim + 2; ++c) std::cout << p.q[c] << ',';
    std::cout << to_string(which) << ',' << kkt << '\n';
  } else {
    std::cout << ctx.report["results"].dump() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- limit

template <int Dim>
int run_limit(Context& ctx, const FieldFileInfo& info) {
  sim::SimConfig base;
  if (info.has_sidecar) base.epsilon = info.epsilon;
  const sim::SimConfig cfg = effective_config(base, ctx.sub, ctx.flags);
  const auto field = read_field<Dim>(ctx.flags.in);
  LimiterOptions opts = cfg.limiter;
  opts.solver.h_mesh = field.h();
  opts.solver.dim = Dim;
  const auto target = ConservationTarget<Dim>::from_field(field);
  const auto bad_in = detect_violations(field, opts.set);
  auto [out, rep] = limit_cell_averages(field, target, opts);
  const auto bad_out = detect_violations(out, opts.set);

  std::vector<double> residuals;
  for (int c = 0; c < Dim + 2; ++c) residuals.push_back(out.column_sum(c) - target.totals[c]);
  write_field(ctx.out / "limited.csv", out, cfg.epsilon,
              {{"norm", to_string(opts.norm)}, {"converged", rep.converged}, {"source", ctx.flags.in}});

  ctx.report["parameters"] = cfg.to_json();
  ctx.report["parameters"]["in"] = ctx.flags.in;
  ctx.report["parameters"]["dim"] = Dim;
  nlohmann::json res = to_json(rep);
  res["n_cells"] = field.n_cells();
  res["violations_in"] = bad_in.size();
  res["violations_out"] = bad_out.size();
  res["column_residuals"] = residuals;
  res["output"] = "limited.csv";
  ctx.report["results"] = res;

  if (ctx.flags.format == "csv") {
    std::cout << "iterations,projections,converged,violations_in,violations_out\n"
              << rep.iterations << ',' << rep.projections << ',' << (rep.converged ? 1 : 0) << ','
              << bad_in.size() << ',' << bad_out.size() << '\n';
  } else {
    std::cout << nlohmann::json{{"iterations", rep.iterations},
                                {"projections", rep.projections},
                                {"converged", rep.converged},
                                {"violations_in", bad_in.size()},
                                {"violations_out", bad_out.size()}}
                     .dump()
              << '\n';
  }
  return rep.converged ? kExitOk : kExitNoConvergence;
}

// ---------------------------------------------------------- synth-advect

inline int run_synth_advect(Context& ctx) {
  sim::SimConfig base;
  base.mesh_n = 300;
  base.degree = 3;
  base.t_end = 1.0;
  base.dt = 0.001;
  base.limiter.solver.tol = 1e-13;
  base.limiter.solver.gamma_step = 1e-10;
  const sim::SimConfig cfg = effective_config(base, ctx.sub, ctx.flags);
  sim::AdvectionSetup s;
  s.n_cells = cfg.mesh_n;
  s.degree = cfg.degree;
  s.dt = *cfg.dt;
  s.n_steps = std::lround(cfg.t_end / s.dt);
  const auto run = sim::advect_1d_rkdg(s);

  {
    std::ofstream out(ctx.out / "advect_averages.csv");
    if (!out) throw IoError("cannot write advect_averages.csv");
    out << "step,t";
    for (std::size_t i = 0; i < s.n_cells; ++i) out << ",c" << i;
    out << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
      out << k + 1 << ',' << static_cast<double>(k + 1) * s.dt;
      for (double v : run.snapshots[k]) out << ',' << v;
      out << '\n';
    }
  }

  SolverConfig l2 = cfg.limiter.solver, l1 = cfg.limiter.solver;
  l2.gamma_step = 1.0;
  const auto study = sim::scalar_limiting_study(run, 1.0, 2.0, l2, l1);
  write_records_csv(ctx.out / "iterations.csv", study);
  write_json(ctx.out / "study.json", study.to_json());

  ctx.report["parameters"] = cfg.to_json();
  ctx.report["parameters"]["bounds"] = {1.0, 2.0};
  ctx.report["parameters"]["n_steps"] = s.n_steps;
  nlohmann::json res = study.to_json();
  res.erase("per_dataset");
  res["warning"] = run.warning;
  res["outputs"] = {"advect_averages.csv", "iterations.csv", "study.json"};
  ctx.report["results"] = res;
  if (!run.warning.empty()) std::cerr << "warning: " << run.warning << '\n';
  std::cout << "limited " << study.violating << " of " << study.datasets << " snapshots\n";
  return study.all_converged ? kExitOk : kExitNoConvergence;
}

// ------------------------------------------------------------- synth-lax

inline int run_synth_lax(Context& ctx) {
  sim::SimConfig base;
  base.mesh_n = 400;
  base.limiter.solver.tol = 1e-13;
  base.limiter.solver.gamma_step = 1e-4;
  const sim::SimConfig cfg = effective_config(base, ctx.sub, ctx.flags);
  sim::LaxDatasetOptions o;
  o.n_cells = cfg.mesh_n;
  o.epsilon = cfg.epsilon;
  o.seed = cfg.rng_seed;
  o.states.gamma_gas = cfg.gamma_gas;
  if (given(ctx.sub, "--n-sets")) o.n_sets = ctx.flags.n_sets;
  if (given(ctx.sub, "--amplitude")) o.amplitude = ctx.flags.amplitude;
  if (o.n_sets == 0) throw ConfigError("--n-sets must be >= 1");
  const auto d = sim::lax_perturbation_dataset(o);

  write_field(ctx.out / "lax_base.csv", d.base, cfg.epsilon, {{"shock_cell", d.shock_cell}});
  {
    std::ofstream out(ctx.out / "lax_sets.csv");
    if (!out) throw IoError("cannot write lax_sets.csv");
    out << "set,cell,rho,m1,E\n" << std::setprecision(17);
    for (std::size_t k = 0; k < d.sets.size(); ++k)
      for (std::size_t i = 0; i < d.sets[k].n_cells(); ++i)
        out << k << ',' << i << ',' << d.sets[k](i, 0) << ',' << d.sets[k](i, 1) << ',' << d.sets[k](i, 2)
            << '\n';
  }

  LimiterOptions l2 = cfg.limiter, l1 = cfg.limiter;
  const auto study = sim::lax_limiting_study(d, l2, l1);
  write_records_csv(ctx.out / "iterations.csv", study);
  write_json(ctx.out / "study.json", study.to_json());

  ctx.report["parameters"] = cfg.to_json();
  ctx.report["parameters"]["n_sets"] = o.n_sets;
  ctx.report["parameters"]["amplitude"] = o.amplitude;
  ctx.report["parameters"]["cells_per_side"] = o.cells_per_side;
  ctx.report["parameters"]["domain"] = {o.x0, o.x1};
  ctx.report["parameters"]["time"] = o.t;
  nlohmann::json res = study.to_json();
  res.erase("per_dataset");
  res["shock_cell"] = d.shock_cell;
  res["redraws"] = d.redraws;
  res["outputs"] = {"lax_base.csv", "lax_sets.csv", "iterations.csv", "study.json"};
  ctx.report["results"] = res;
  std::cout << "limited " << study.violating << " of " << study.datasets << " sets\n";
  return study.all_converged ? kExitOk : kExitNoConvergence;
}

// ----------------------------------------------------------- convergence

inline int run_convergence(Context& ctx) {
  std::map<std::string, std::string> keys;
  sim::SimConfig cfg = effective_config(sim::convergence_defaults(Norm::L2), ctx.sub, ctx.flags, &keys);
  // The l1 default step differs from the l2 one unless the user chose a step.
  if (cfg.limiter.norm == Norm::L1 && !given(ctx.sub, "--gamma") && !keys.count("gamma"))
    cfg.limiter.solver.gamma_step = sim::convergence_defaults(Norm::L1).limiter.solver.gamma_step;
  std::vector<std::size_t> meshes = ctx.flags.meshes;
  if (meshes.empty()) meshes = given(ctx.sub, "--mesh") ? std::vector<std::size_t>{cfg.mesh_n}
                                                        : std::vector<std::size_t>{25, 50, 100};
  for (auto n : meshes)
    if (n < 4) throw ConfigError("meshes must be >= 4");
  sim::SimConfig run_cfg = cfg;
  run_cfg.out_dir.clear();  // no per-mesh snapshots
  const auto table = sim::manufactured_convergence(run_cfg, meshes);
  table.write_csv(ctx.out / "errors.csv");

  ctx.report["parameters"] = cfg.to_json();
  ctx.report["parameters"]["meshes"] = meshes;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"n", r.n},
                    {"l2_rho", r.l2_rho},
                    {"l1_rho", r.l1_rho},
                    {"l2_U", r.l2_u},
                    {"l1_U", r.l1_u},
                    {"limiter_invocations", r.invocations},
                    {"max_iterations", r.max_iterations},
                    {"feasible", r.feasible}});
  ctx.report["results"] = {{"rows", rows},
                           {"l2_U_rates", table.rates(&sim::ConvergenceRow::l2_u)},
                           {"l1_U_rates", table.rates(&sim::ConvergenceRow::l1_u)},
                           {"l2_rho_rates", table.rates(&sim::ConvergenceRow::l2_rho)},
                           {"l1_rho_rates", table.rates(&sim::ConvergenceRow::l1_rho)},
                           {"outputs", {"errors.csv"}}};
  std::cout << "wrote " << (ctx.out / "errors.csv").string() << '\n';
  return kExitOk;
}

// ----------------------------------------------------------- sedov / jet

inline int run_benchmark(Context& ctx, const std::string& which) {
  const sim::SimConfig cfg =
      effective_config(which == "sedov" ? sim::sedov_defaults() : sim::jet_defaults(), ctx.sub, ctx.flags);
  sim::SimConfig run_cfg = cfg;
  run_cfg.out_dir = ctx.out;
  const auto rs = which == "sedov" ? sim::run_sedov(run_cfg) : sim::run_jet(run_cfg);
  ctx.report["parameters"] = cfg.to_json();
  nlohmann::json res = rs.to_json();
  res["outputs"] = {"snapshots/", "audit.jsonl"};
  ctx.report["results"] = res;
  std::cout << which << ": " << rs.steps << " steps to t = " << rs.t_final << ", " << rs.invocations
            << " limiter invocations\n";
  return kExitOk;
}

// ------------------------------------------------------------ tune-gamma

template <int Dim>
int run_tune(Context& ctx, const std::vector<CellAverageField<Dim>>& samples, const sim::SimConfig& cfg,
             std::vector<double> grid) {
  nlohmann::json table = nlohmann::json::object();
  std::vector<std::function<SolveReport(double)>> solves;
  for (const auto& s : samples) {
    solves.push_back([&, s](double gamma) {
      LimiterOptions o = cfg.limiter;
      o.norm = Norm::L1;
      o.solver.gamma_step = gamma;
      o.solver.h_mesh = s.h();
      o.solver.dim = Dim;
      auto rep = limit_cell_averages(s, ConservationTarget<Dim>::from_field(s), o).second;
      auto& row = table[std::to_string(gamma)];
      row["gamma"] = gamma;
      row["iterations"].push_back(rep.iterations);
      row["converged"].push_back(rep.converged);
      return rep;
    });
  }
  ctx.report["parameters"] = cfg.to_json();
  ctx.report["parameters"]["grid"] = grid;
  ctx.report["parameters"]["samples"] = samples.size();
  nlohmann::json res{{"table", table}};
  try {
    const double best = tune_gamma(solves, grid);
    res["table"] = table;
    res["best_gamma"] = best;
    ctx.report["results"] = res;
    std::cout << "best gamma " << best << '\n';
    return kExitOk;
  } catch (const SolverFailure&) {
    res["table"] = table;
    res["best_gamma"] = nullptr;
    ctx.report["results"] = res;
    throw;
  }
}

inline int run_tune_gamma(Context& ctx) {
  sim::SimConfig base;
  base.mesh_n = 400;
  base.limiter.solver.tol = 1e-13;
  base.limiter.solver.max_iter = 2000;
  const sim::SimConfig cfg = effective_config(base, ctx.sub, ctx.flags);
  std::vector<double> grid = ctx.flags.grid;
  if (grid.empty()) grid = {1e-8, 1e-6, 1e-4, 1e-2, 1.0};
  for (double g : grid)
    if (!(g > 0.0)) throw ConfigError("grid values must be > 0");
  if (given(ctx.sub, "--in")) {
    const auto info = inspect_field(ctx.flags.in);
    if (info.dim == 1) return run_tune<1>(ctx, {read_field<1>(ctx.flags.in)}, cfg, grid);
    return run_tune<2>(ctx, {read_field<2>(ctx.flags.in)}, cfg, grid);
  }
  sim::LaxDatasetOptions o;
  o.n_cells = cfg.mesh_n;
  o.epsilon = cfg.epsilon;
  o.seed = cfg.rng_seed;
  o.n_sets = given(ctx.sub, "--n-sets") ? ctx.flags.n_sets : 5;
  if (o.n_sets == 0) throw ConfigError("--n-sets must be >= 1");
  return run_tune<1>(ctx, sim::lax_perturbation_dataset(o).sets, cfg, grid);
}

// -------------------------------------------------------------- selftest

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline Check selftest_projection(std::uint64_t seed, int n_per_dim) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rho(-1.0, 2.0), energy(-1.0, 3.0);
  std::normal_distribution<double> mom(0.0, 1.5);
  const double eps_choices[] = {1e-13, 1e-3, 0.1};
  const auto fallbacks = projection_diagnostics().fallback_events.load();
  double worst_kkt = 0.0, worst_gap = 0.0;
  bool all_in = true;
  auto one = [&](auto x, const AdmissibleSet& g) {
    const auto p = project(x, g);
    const auto ref = idp::detail::numerical_projection(x, g);
    all_in = all_in && in_admissible_set(p, g);
    worst_kkt = std::max(worst_kkt, kkt_residual(x, p, g));
    const double dp = std::sqrt(idp::detail::squared_distance(p, x));
    const double dr = std::sqrt(idp::detail::squared_distance(ref, x));
    worst_gap = std::max(worst_gap, (dp - dr) / (1.0 + dr));
  };
  for (int k = 0; k < n_per_dim; ++k) {
    const AdmissibleSet g(eps_choices[k % 3]);
    one(State1(rho(rng), {mom(rng)}, energy(rng)), g);
    one(State2(rho(rng), {mom(rng), mom(rng)}, energy(rng)), g);
  }
  const auto fb = projection_diagnostics().fallback_events.load() - fallbacks;
  std::ostringstream os;
  os << 2 * n_per_dim << " points, max KKT " << worst_kkt << ", max gap to descent " << worst_gap
     << ", fallbacks " << fb;
  return {"projection oracle sample", all_in && worst_kkt < 1e-9 && worst_gap < 1e-9 && fb == 0, os.str()};
}

inline Check selftest_prox(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_real_distribution<double> step(0.0, 1.5);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(7), u(7);
    for (auto& v : x) v = n(rng);
    for (auto& v : u) v = n(rng);
    const double gamma = step(rng), m = -1.0, M = 1.5, b = n(rng);
    // The bounded l1 prox is the unbounded one clipped.
    const auto a = prox_l1_box(x, u, m, M, gamma);
    const auto c = prox_box(prox_l1_shift(x, u, gamma), m, M);
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(a[i] - c[i]));
    // The conservation projection hits the sum and is idempotent.
    const auto p = prox_conservation(x, b);
    worst = std::max(worst, std::abs(pairwise_sum(p) - b) / (1.0 + std::abs(b)));
    const auto pp = prox_conservation(p, b);
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(pp[i] - p[i]));
    // The quadratic prox with zero step is the conservation projection.
    ProxContext ctx;
    ctx.gamma_step = 1e-300;
    const auto q = prox_quadratic_affine(x, ctx, u, b);
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(q[i] - p[i]));
  }
  std::ostringstream os;
  os << "max identity defect " << worst;
  return {"prox identities", worst < 1e-12, os.str()};
}

inline Check selftest_four_variable() {
  const std::vector<double> c{1.0, 1.0, 2.0, 2.1};
  const std::vector<double> want{1.05, 1.05, 2.0, 2.0};
  SolverConfig cfg;
  cfg.tol = 1e-13;
  cfg.gamma_step = 1e-4;
  const auto [x1, r1] = drs_l1_scalar(c, 1.0, 2.0, 6.1, cfg);
  const auto [x2, r2] = dys_l2_scalar(c, 1.0, 2.0, 6.1, cfg);
  const auto xc = clip_and_assured_sum(c, 1.0, 2.0, 6.1);
  double err = 0.0, obj = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    err = std::max({err, std::abs(x1[i] - want[i]), std::abs(x2[i] - want[i]), std::abs(xc[i] - want[i])});
    obj += std::abs(x1[i] - c[i]);
  }
  std::ostringstream os;
  os << "max deviation " << err << ", l1 objective " << obj << ", iterations l1 " << r1.iterations << " l2 "
     << r2.iterations;
  return {"four-variable example", r1.converged && r2.converged && err < 1e-9 && std::abs(obj - 0.2) < 1e-9,
          os.str()};
}

inline int run_selftest(Context& ctx) {
  const std::uint64_t seed = given(ctx.sub, "--seed") ? ctx.flags.seed : 1;
  std::vector<Check> checks{selftest_projection(seed, 500), selftest_prox(seed), selftest_four_variable()};
  bool ok = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    ok = ok && c.pass;
  }
  ctx.report["parameters"] = {{"seed", seed}};
  ctx.report["results"] = {{"checks", arr}};
  return ok ? kExitOk : kExitSelftestFailed;
}

inline const char* status_name(int code) {
  switch (code) {
    case kExitOk: return "ok";
    case kExitSelftestFailed: return "selftest_failed";
    case kExitNoConvergence: return "not_converged";
    case kExitInfeasible: return "infeasible";
    default: return "io_or_config_error";
  }
}

}  // namespace detail

/// Parses argv, dispatches the subcommand and maps failures to exit codes:
/// 0 success, 1 selftest failure, 2 non-convergence, 3 infeasible problem,
/// 4 I/O, configuration or usage errors.
inline int run_cli(int argc, const char* const* argv) {
  using detail::given;
  Flags f;
  CLI::App app{"Invariant-domain-preserving limiters for the Euler equations"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* s) {
    s->add_option("--out", f.out, "Output directory; nothing is written outside it")->capture_default_str();
    s->add_option("--threads", f.threads, "Worker threads (0 = hardware count)");
    s->add_option("--format", f.format, "Format of the summary printed to stdout")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto solver = [&](CLI::App* s) {
    s->add_option("--config", f.config, "key = value file applied before explicit flags");
    s->add_option("--norm", f.norm, "Limiter norm")->check(CLI::IsMember({"l1", "l2", "L1", "L2"}));
    s->add_option("--gamma", f.gamma, "DRS step of the l1 model");
    s->add_option("--lambda", f.lambda, "Relaxation in (0, 2]");
    s->add_option("--tol", f.tol, "Stopping tolerance on the scaled fixed-point residual");
    s->add_option("--max-iter", f.max_iter, "Iteration cap");
    s->add_option("--alpha", f.alpha, "Fidelity weight of the l2 model");
    s->add_option("--epsilon", f.epsilon, "Positivity threshold of the admissible set");
    s->add_flag("--restrict-region", f.restrict_region, "Limit only inadmissible or energetic cells");
  };
  auto mesh = [&](CLI::App* s) {
    s->add_option("--mesh", f.mesh, "Cells per direction");
    s->add_option("--cfl", f.cfl, "CFL number");
    s->add_option("--t-end", f.t_end, "Final time");
    s->add_option("--dt", f.dt, "Fixed time step");
    s->add_option("--degree", f.degree, "Polynomial degree");
  };

  auto* project = app.add_subcommand("project", "Project one state onto the admissible set");
  common(project);
  project->add_option("--point", f.point, "rho,m1[,m2],E")->delimiter(',')->required();
  project->add_option("--dim", f.dim, "Space dimension (default from the point length)")
      ->check(CLI::IsMember({1, 2}));
  project->add_option("--epsilon", f.epsilon, "Positivity threshold");

  auto* limit = app.add_subcommand("limit", "Limit a cell-average field read from CSV");
  common(limit);
  solver(limit);
  limit->add_option("--in", f.in, "Input CSV (rho,m1[,m2],E) with optional .json sidecar")->required();

  auto* advect = app.add_subcommand("synth-advect", "Advection snapshots limited with both scalar models");
  common(advect);
  solver(advect);
  mesh(advect);

  auto* lax = app.add_subcommand("synth-lax", "Perturbed Lax datasets limited with both Euler models");
  common(lax);
  solver(lax);
  lax->add_option("--mesh", f.mesh, "Number of cells");
  lax->add_option("--seed", f.seed, "Perturbation seed");
  lax->add_option("--n-sets", f.n_sets, "Number of perturbed datasets");
  lax->add_option("--amplitude", f.amplitude, "Multiplier of the perturbation scales");

  auto* conv = app.add_subcommand("convergence", "Manufactured near-vacuum convergence study");
  common(conv);
  solver(conv);
  mesh(conv);
  conv->add_option("--meshes", f.meshes, "Mesh sizes, e.g. 25,50,100")->delimiter(',');

  auto* sedov = app.add_subcommand("sedov", "Sedov blast wave");
  auto* jet = app.add_subcommand("jet", "Mach 2000 jet");
  for (auto* s : {sedov, jet}) {
    common(s);
    solver(s);
    mesh(s);
    s->add_option("--snapshot-every", f.snapshot_every, "Write a snapshot every N steps (0: first and last)");
  }

  auto* tune = app.add_subcommand("tune-gamma", "Pick the l1 DRS step with the fewest iterations");
  common(tune);
  solver(tune);
  tune->add_option("--in", f.in, "Field to tune on (default: perturbed Lax sets)");
  tune->add_option("--mesh", f.mesh, "Number of cells of the Lax samples");
  tune->add_option("--seed", f.seed, "Seed of the Lax samples");
  tune->add_option("--n-sets", f.n_sets, "Number of Lax samples");
  tune->add_option("--grid", f.grid, "Candidate steps")->delimiter(',');

  auto* self = app.add_subcommand("selftest", "Fast property checks");
  common(self);
  self->add_option("--seed", f.seed, "Seed of the random samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitIoOrConfig;
  }

  detail::Context ctx;
  ctx.sub = app.get_subcommands().front();
  ctx.flags = f;
  ctx.out = f.out;
  const std::string name = ctx.sub->get_name();
  ctx.report["command"] = name;
  ctx.report["argv"] = std::vector<std::string>(argv, argv + argc);
  ctx.report["defaults_version"] = kDefaultsVersion;

  int code = kExitOk;
  try {
    if (f.threads < 0) throw detail::ConfigError("--threads must be >= 0");
    ctx.threads = f.threads > 0 ? f.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::filesystem::create_directories(ctx.out);
    if (name == "project") {
      const int dim = f.dim ? f.dim : static_cast<int>(f.point.size()) - 2;
      if ((dim != 1 && dim != 2) || f.point.size() != static_cast<std::size_t>(dim + 2))
        throw detail::ConfigError("--point needs 3 values in 1D or 4 in 2D");
      code = dim == 1 ? detail::run_project<1>(ctx) : detail::run_project<2>(ctx);
    } else if (name == "limit") {
      const auto info = inspect_field(f.in);
      code = info.dim == 1 ? detail::run_limit<1>(ctx, info) : detail::run_limit<2>(ctx, info);
    } else if (name == "synth-advect") {
      code = detail::run_synth_advect(ctx);
    } else if (name == "synth-lax") {
      code = detail::run_synth_lax(ctx);
    } else if (name == "convergence") {
      code = detail::run_convergence(ctx);
    } else if (name == "sedov" || name == "jet") {
      code = detail::run_benchmark(ctx, name);
    } else if (name == "tune-gamma") {
      code = detail::run_tune_gamma(ctx);
    } else {
      code = detail::run_selftest(ctx);
    }
  } catch (const SolverFailure& e) {
    ctx.report["error"] = e.what();
    code = kExitNoConvergence;
  } catch (const InfeasibleProblem& e) {
    ctx.report["error"] = e.what();
    code = kExitInfeasible;
  } catch (const IoError& e) {
    ctx.report["error"] = e.what();
    code = kExitIoOrConfig;
  } catch (const std::invalid_argument& e) {
    ctx.report["error"] = e.what();
    code = kExitIoOrConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    ctx.report["error"] = e.what();
    code = kExitIoOrConfig;
  } catch (const std::exception& e) {
    // Non-finite states or a collapsed time step: the run did not converge.
    ctx.report["error"] = e.what();
    code = kExitNoConvergence;
  }
  if (ctx.report.contains("error")) std::cerr << "error: " << ctx.report["error"].get<std::string>() << '\n';

  ctx.report["threads"] = ctx.threads;
  ctx.report["exit_code"] = code;
  ctx.report["status"] = detail::status_name(code);
  try {
    std::filesystem::create_directories(ctx.out);
    detail::write_json(ctx.out / "report.json", ctx.report);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write report: " << e.what() << '\n';
    return kExitIoOrConfig;
  }
  return code;
}

}  // namespace idp::cli
