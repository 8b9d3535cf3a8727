#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "idp/io.hpp"
#include "idp/sim/advection1d.hpp"
#include "idp/sim/config.hpp"
#include "idp/sim/pipeline.hpp"
#include "idp/sim/riemann.hpp"
#include "idp/sim/runs.hpp"

using namespace idp;
using namespace idp::sim;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("idp_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Star pressure by bisection on the textbook pressure function.
double star_pressure_by_bisection(const RiemannStates& s) {
  const double g = s.gamma_gas;
  auto f = [&](double p, const Primitive1D& K) {
    const double c = std::sqrt(g * K.p / K.rho);
    if (p > K.p) {
      const double A = 2.0 / ((g + 1.0) * K.rho), B = (g - 1.0) / (g + 1.0) * K.p;
      return (p - K.p) * std::sqrt(A / (p + B));
    }
    return 2.0 * c / (g - 1.0) * (std::pow(p / K.p, (g - 1.0) / (2.0 * g)) - 1.0);
  };
  double lo = 1e-12, hi = 1e4;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid, s.left) + f(mid, s.right) + s.right.u - s.left.u > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::array<double, 3> flux(const Primitive1D& w, double g) {
  const double E = w.p / (g - 1.0) + 0.5 * w.rho * w.u * w.u;
  return {w.rho * w.u, w.rho * w.u * w.u + w.p, (E + w.p) * w.u};
}

}  // namespace

// ------------------------------------------------------------- advection

TEST(Advection, ConstantDataStaysConstant) {
  AdvectionSetup s;
  s.n_cells = 30;
  s.n_steps = 50;
  s.dt = 0.01;
  const auto run = advect_1d_rkdg(s, [](double) { return 1.5; });
  for (const auto& snap : run.snapshots)
    for (double v : snap) ASSERT_NEAR(v, 1.5, 1e-13);
}

TEST(Advection, ReferenceRunLeavesTheBounds) {
  const auto run = advect_1d_rkdg(AdvectionSetup{});
  ASSERT_EQ(run.snapshots.size(), 1000u);
  EXPECT_TRUE(run.warning.empty());
  std::size_t outside = 0;
  for (const auto& snap : run.snapshots)
    for (double v : snap)
      if (v < 1.0 || v > 2.0) {
        ++outside;
        break;
      }
  EXPECT_GT(outside, 0u);
  // The exact solution travels one unit; total mass is conserved.
  double m0 = 0.0, m1 = 0.0;
  for (double v : run.snapshots.front()) m0 += v;
  for (double v : run.snapshots.back()) m1 += v;
  EXPECT_NEAR(m0, m1, 1e-10);
}

TEST(Advection, SmoothProfileConvergesAtHighOrder) {
  auto sine = [](double x) { return 1.5 + 0.25 * std::sin(2.0 * M_PI * x / 3.0); };
  std::vector<double> err;
  for (std::size_t n : {10, 20}) {
    AdvectionSetup s;
    s.n_cells = n;
    s.dt = 0.3 / static_cast<double>(n) / 7.0;
    s.n_steps = static_cast<long>(std::lround(0.5 / s.dt));
    s.dt = 0.5 / static_cast<double>(s.n_steps);
    const auto run = advect_1d_rkdg(s, sine);
    const double h = 3.0 / n;
    double e = 0.0;
    const auto& last = run.snapshots.back();
    for (std::size_t i = 0; i < n; ++i) {
      const double a = i * h - 0.5, b = a + h;
      const double k = 2.0 * M_PI / 3.0;
      const double exact = 1.5 - 0.25 * (std::cos(k * b) - std::cos(k * a)) / (k * h);
      e = std::max(e, std::abs(last[i] - exact));
    }
    err.push_back(e);
  }
  EXPECT_GT(std::log2(err[0] / err[1]), 3.5);
}

TEST(Advection, LargeStepProducesWarning) {
  AdvectionSetup s;
  s.n_cells = 30;
  s.dt = 0.05;
  s.n_steps = 1;
  EXPECT_FALSE(advect_1d_rkdg(s).warning.empty());
}

// --------------------------------------------------------------- Riemann

TEST(Riemann, IdenticalStatesReturnThatState) {
  RiemannStates s;
  s.left = s.right = {1.3, 0.2, 0.7};
  const ExactRiemann rs(s);
  EXPECT_NEAR(rs.star_pressure(), 0.7, 1e-12);
  EXPECT_NEAR(rs.star_velocity(), 0.2, 1e-12);
  for (double xi : {-3.0, 0.0, 0.2, 5.0}) {
    const auto w = rs.sample(xi);
    EXPECT_NEAR(w.rho, 1.3, 1e-12);
    EXPECT_NEAR(w.u, 0.2, 1e-12);
    EXPECT_NEAR(w.p, 0.7, 1e-12);
  }
}

TEST(Riemann, SodStarStateMatchesBisection) {
  RiemannStates s;
  s.left = {1.0, 0.0, 1.0};
  s.right = {0.125, 0.0, 0.1};
  const ExactRiemann rs(s);
  EXPECT_NEAR(rs.star_pressure(), star_pressure_by_bisection(s), 1e-12);
  EXPECT_NEAR(rs.star_pressure(), 0.30313, 1e-5);
  EXPECT_LT(rs.residual(), 1e-12);
}

TEST(Riemann, LaxShockSatisfiesJumpConditionsAndFanIsContinuous) {
  const RiemannStates s;
  const ExactRiemann rs(s);
  EXPECT_NEAR(rs.star_pressure(), star_pressure_by_bisection(s), 1e-12);
  EXPECT_LT(rs.residual(), 1e-12);
  const double g = s.gamma_gas, S = rs.right_shock_speed();
  const auto a = rs.sample(S - 1e-12), b = rs.sample(S + 1e-12);
  const auto fa = flux(a, g), fb = flux(b, g);
  const auto ua = to_conserved(a, g).q, ub = to_conserved(b, g).q;
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(fb[c] - fa[c], S * (ub[c] - ua[c]), 1e-8) << "component " << c;

  // Left wave of the Lax data is a fan; its edges are continuous.
  const auto w = rs.wave_speeds();
  for (double edge : {w[0], w[1]}) {
    const auto l = rs.sample(edge - 1e-10), r = rs.sample(edge + 1e-10);
    EXPECT_LT(std::abs(l.rho - r.rho) + std::abs(l.u - r.u) + std::abs(l.p - r.p), 1e-8);
  }
}

TEST(Riemann, VacuumDataThrow) {
  RiemannStates s;
  s.left = {1.0, -20.0, 0.1};
  s.right = {1.0, 20.0, 0.1};
  EXPECT_THROW(ExactRiemann{s}, std::domain_error);
}

TEST(LaxDataset, PerturbationsConserveAndViolate) {
  LaxDatasetOptions o;
  o.n_sets = 20;
  const auto d = lax_perturbation_dataset(o);
  const AdmissibleSet g(o.epsilon);
  EXPECT_TRUE(detect_violations(d.base, g).empty());
  ASSERT_EQ(d.sets.size(), 20u);
  for (const auto& f : d.sets) {
    EXPECT_FALSE(detect_violations(f, g).empty());
    for (int c = 0; c < 3; ++c)
      EXPECT_NEAR(f.column_sum(c), d.base.column_sum(c), 1e-12 * (1.0 + std::abs(d.base.column_sum(c))));
  }
  // Same seed, same data.
  const auto again = lax_perturbation_dataset(o);
  EXPECT_EQ(again.sets.back().storage(), d.sets.back().storage());
}

TEST(LaxDataset, ZeroAmplitudeIsTheBaseField) {
  LaxDatasetOptions o;
  o.n_sets = 2;
  o.amplitude = 0.0;
  const auto d = lax_perturbation_dataset(o);
  for (const auto& f : d.sets) EXPECT_EQ(f.storage(), d.base.storage());
  EXPECT_EQ(d.redraws, 0u);
}

// ---------------------------------------------------------- setups

TEST(Sedov, CornerCellCarriesTheBlastEnergy) {
  const SimConfig cfg = sedov_defaults();
  const auto sol = sedov_initial(cfg);
  const auto avg = dg::cell_averages<2>(sol);
  const double h = 1.1 / 40.0;
  EXPECT_NEAR(avg(0, 3), 0.244816 / (h * h), 1e-9);
  EXPECT_DOUBLE_EQ(avg(1, 3), 1e-12);
  EXPECT_DOUBLE_EQ(avg(5, 0), 1.0);
  EXPECT_TRUE(dg::all_points_admissible<2>(sol, AdmissibleSet(cfg.epsilon, cfg.gamma_gas)));
}

TEST(Jet, InflowGhostCarriesTheJetState) {
  const double g = 5.0 / 3.0;
  const auto bc = jet_boundary(g);
  const State4 inside{0.5, 0.0, 0.0, 0.4127 / (g - 1.0)};
  const auto ghost = ghost_state(bc.edge[0], inside, -1.0, 0.0, 0.0, 0.01, 0.0);
  EXPECT_DOUBLE_EQ(ghost[0], 5.0);
  EXPECT_DOUBLE_EQ(ghost[1], 4000.0);
  EXPECT_DOUBLE_EQ(ghost[2], 0.0);
  EXPECT_NEAR((g - 1.0) * (ghost[3] - 0.5 * ghost[1] * ghost[1] / ghost[0]), 0.4127, 1e-9);
  const auto ambient = ghost_state(bc.edge[0], inside, -1.0, 0.0, 0.0, 0.3, 0.0);
  EXPECT_DOUBLE_EQ(ambient[0], 0.5);
  EXPECT_DOUBLE_EQ(ambient[1], 0.0);
}

// ---------------------------------------------------------- config / io

TEST(Config, ParsesKnownKeysAndRejectsUnknown) {
  const auto dir = scratch_dir("config");
  {
    std::ofstream f(dir / "run.cfg");
    f << "# sedov tweaks\nmesh_n = 20\ncfl=0.1  # smaller\nnorm = l1\nrestrict_region = off\ngamma = 1e-4\n";
  }
  SimConfig cfg = sedov_defaults();
  apply_key_values(read_key_values(dir / "run.cfg"), cfg);
  EXPECT_EQ(cfg.mesh_n, 20u);
  EXPECT_DOUBLE_EQ(cfg.cfl, 0.1);
  EXPECT_EQ(cfg.limiter.norm, Norm::L1);
  EXPECT_FALSE(cfg.limiter.restrict_region);
  EXPECT_DOUBLE_EQ(cfg.limiter.solver.gamma_step, 1e-4);
  EXPECT_NO_THROW(cfg.validate());

  EXPECT_THROW(apply_key_values({{"mesh", "3"}}, cfg), IoError);
  EXPECT_THROW(apply_key_values({{"cfl", "fast"}}, cfg), IoError);
  EXPECT_THROW(read_key_values(dir / "missing.cfg"), IoError);
  cfg.cfl = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(FieldIo, WriteReadRoundTripIsExact) {
  const auto dir = scratch_dir("io");
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  CellAverageField<2> f(17, 0.125, std::array<double, 4>{0.0, 1.0, -0.5, 0.5});
  for (auto& v : f.values()) v = n(rng);
  write_field(dir / "f.csv", f, 1e-8);
  const auto info = inspect_field(dir / "f.csv");
  EXPECT_EQ(info.dim, 2);
  EXPECT_EQ(info.n_cells, 17u);
  EXPECT_DOUBLE_EQ(info.epsilon, 1e-8);
  const auto g = read_field<2>(dir / "f.csv");
  EXPECT_EQ(g.storage(), f.storage());
  EXPECT_DOUBLE_EQ(g.h(), 0.125);
  EXPECT_EQ(g.domain_box(), f.domain_box());
  EXPECT_THROW(read_field<1>(dir / "f.csv"), IoError);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "rho,m1,E\n1,2\n";
  }
  EXPECT_THROW(read_field<1>(dir / "bad.csv"), IoError);
}

// ---------------------------------------------------------- pipeline

TEST(Pipeline, RestrictedLimitingLeavesExcludedCellsAndDeviationsAlone) {
  SimConfig cfg = sedov_defaults();
  cfg.mesh_n = 8;
  auto sol = sedov_initial(cfg);
  // Knock two cells near the corner out of the admissible set.
  auto avg = dg::cell_averages<2>(sol);
  avg(1, 3) = -0.5;
  avg(8, 0) = -0.1;
  avg(0, 3) += 0.5;
  avg(0, 0) += 0.1;
  dg::postprocess_dg(sol, avg);
  const auto before = dg::cell_averages<2>(sol);
  LimiterOptions o = cfg.limiter;
  o.set = AdmissibleSet(cfg.epsilon, cfg.gamma_gas);
  o.solver.h_mesh = sol.h;
  o.solver.dim = 2;
  LimiterPipeline pipe(o);
  pipe(sol, 1);
  ASSERT_EQ(pipe.records().size(), 1u);
  EXPECT_TRUE(pipe.records()[0].converged);
  EXPECT_TRUE(pipe.excluded_always_untouched());
  EXPECT_LT(pipe.records()[0].region_size, sol.n_cells());
  const auto after = dg::cell_averages<2>(sol);
  const auto region = select_limiting_region(before, o.set, o.region_threshold);
  std::vector<char> in(sol.n_cells(), 0);
  for (auto i : region) in[i] = 1;
  for (std::size_t i = 0; i < sol.n_cells(); ++i) {
    if (in[i]) continue;
    for (int c = 0; c < 4; ++c) EXPECT_EQ(after(i, c), before(i, c)) << "cell " << i;
  }
  EXPECT_TRUE(detect_violations(after, o.set).empty());
  EXPECT_TRUE(dg::all_points_admissible<2>(sol, o.set));
  EXPECT_LT(pipe.worst_conservation(), 1e-11);
}
