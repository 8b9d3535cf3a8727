#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "idp/diagnostics.hpp"
#include "idp/limiter.hpp"
#include "idp/splitting.hpp"
#include "oracles.hpp"

using namespace idp;

namespace {

double l1_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}
double l2_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

SolverConfig tight() {
  SolverConfig c;
  c.tol = 1e-13;
  return c;
}

// Random scalar instance that needs limiting, with a feasible target sum.
struct ScalarCase {
  std::vector<double> u;
  double m, M, b;
};
ScalarCase random_scalar(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ScalarCase c{std::vector<double>(n), 1.0, 2.0, 0.0};
  for (double& v : c.u) v = 0.8 + 1.4 * unif(rng);
  c.b = 0;
  for (double v : c.u) c.b += v;
  c.b = std::min(std::max(c.b, n * c.m), n * c.M);
  return c;
}

}  // namespace

TEST(Drs, SingletonFixedPoint) {
  const Vec c{1.5, -2.0};
  auto pin = [&](const Vec&, Vec& out) { out = c; };
  auto [x, rep] = drs_solve(pin, pin, c, tight());
  EXPECT_EQ(x, c);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_TRUE(rep.converged);
}

TEST(Drs, RejectsBadConfig) {
  SolverConfig c;
  c.lambda_relax = 2.0;
  auto id = [](const Vec& in, Vec& out) { out = in; };
  EXPECT_THROW(drs_solve(id, id, Vec{1.0}, c), std::invalid_argument);
  c.lambda_relax = 1.0;
  c.tol = 0.0;
  EXPECT_THROW(drs_solve(id, id, Vec{1.0}, c), std::invalid_argument);
}

TEST(Dys, QuadraticOnlyConvergesToReference) {
  const Vec u{3.0, -1.0, 0.25};
  auto id = [](const Vec& in, Vec& out) { out = in; };
  auto grad = [&](const Vec& in, Vec& out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - u[i];
  };
  Vec z(3, 0.0);
  auto [x, rep] = dys_solve(id, id, grad, 1.0, z, tight());
  EXPECT_TRUE(rep.converged);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(x[i], u[i], 1e-12);
  SolverConfig bad = tight();
  bad.gamma_step = 2.0;
  EXPECT_THROW(dys_solve(id, id, grad, 1.0, z, bad), std::invalid_argument);
}

TEST(ScalarL2, Examples) {
  const std::vector<double> a{1.5, 1.5};
  auto [x, rep] = dys_l2_scalar(a, 1, 2, 3, tight());
  EXPECT_EQ(x, a);
  const std::vector<double> b{1.2, -0.2};
  auto [y, rep2] = dys_l2_scalar(b, 0, 1, 1, tight());
  EXPECT_NEAR(y[0], 1.0, 1e-12);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
  const std::vector<double> c{1, 1, 2, 2.1};
  auto [z, rep3] = dys_l2_scalar(c, 1, 2, 6.1, tight());
  EXPECT_NEAR(z[0], 1.05, 1e-9);
  EXPECT_NEAR(z[1], 1.05, 1e-9);
  EXPECT_NEAR(z[2], 2.0, 1e-9);
  EXPECT_NEAR(z[3], 2.0, 1e-9);
  EXPECT_THROW(dys_l2_scalar(c, 1, 2, 9.0, tight()), InfeasibleProblem);
  EXPECT_THROW(drs_l1_scalar(c, 1, 2, 3.0, tight()), InfeasibleProblem);
}

TEST(ScalarL1, FourVariableExample) {
  const std::vector<double> c{1, 1, 2, 2.1};
  SolverConfig cfg = tight();
  cfg.gamma_step = 1e-4;
  auto [x, rep] = drs_l1_scalar(c, 1, 2, 6.1, cfg);
  EXPECT_TRUE(rep.converged);
  const std::vector<double> want{1.05, 1.05, 2, 2};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(x[i], want[i], 1e-9);
  EXPECT_NEAR(l1_dist(x, c), 0.2, 1e-9);
  EXPECT_GT(rep.projections, rep.iterations);
}

TEST(ScalarL1, AlreadyFeasibleIsIdentity) {
  const std::vector<double> c{1.2, 1.7, 1.1};
  SolverConfig cfg = tight();
  cfg.gamma_step = 1e-2;
  auto [x, rep] = drs_l1_scalar(c, 1, 2, 4.0, cfg);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(x[i], c[i], 1e-12);
}

TEST(ScalarSolvers, MatchOracles) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_scalar(rng, 2 + t % 40);
    SolverConfig cfg = tight();
    cfg.h_mesh = 1.0 / c.u.size();
    auto [x2, r2] = dys_l2_scalar(c.u, c.m, c.M, c.b, cfg);
    ASSERT_TRUE(r2.converged);
    const auto ref = oracle::l2_box_by_multiplier(c.u, c.m, c.M, c.b);
    EXPECT_LT(l2_dist(x2, ref), 1e-8);
    for (double v : x2) {
      EXPECT_GE(v, c.m);
      EXPECT_LE(v, c.M);
    }
    EXPECT_LE(r2.conservation_residual, std::max(cfg.tol, 1e-11 * std::abs(c.b)) * 10);
    const double l1min = oracle::l1_box_minimum(c.u, c.m, c.M, c.b);
    // The l2 minimizer is also an l1 minimizer for scalars.
    EXPECT_NEAR(l1_dist(x2, c.u), l1min, 1e-9);

    cfg.gamma_step = 1e-3;
    auto [x1, r1] = drs_l1_scalar(c.u, c.m, c.M, c.b, cfg);
    ASSERT_TRUE(r1.converged);
    EXPECT_NEAR(l1_dist(x1, c.u), l1min, 1e-9);
    const auto cas = clip_and_assured_sum(c.u, c.m, c.M, c.b);
    EXPECT_NEAR(l1_dist(cas, c.u), l1min, 1e-12 * c.u.size());
  }
}

TEST(ScalarSolvers, DrsOnL2ModelAgreesWithDys) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto c = random_scalar(rng, 10);
    ProxContext ctx;
    ctx.gamma_step = 0.7;
    const double b[1] = {c.b};
    auto prox_g = [&](const Vec& in, Vec& out) { prox_quadratic_affine(in, 1, b, c.u, ctx, out); };
    auto prox_h = [&](const Vec& in, Vec& out) { prox_box(in, c.m, c.M, out); };
    SolverConfig cfg = tight();
    cfg.gamma_step = ctx.gamma_step;
    auto [xd, rd] = drs_solve(prox_g, prox_h, c.u, cfg);
    auto [xy, ry] = dys_l2_scalar(c.u, c.m, c.M, c.b, tight());
    ASSERT_TRUE(rd.converged);
    EXPECT_LT(l2_dist(xd, xy), 1e-8);
  }
}

TEST(ScalarSolvers, ResidualTailIsGeometric) {
  std::mt19937_64 rng(99);
  int fits = 0;
  for (int t = 0; t < 50; ++t) {
    const auto c = random_scalar(rng, 60);
    auto [x, rep] = dys_l2_scalar(c.u, c.m, c.M, c.b, tight());
    ASSERT_TRUE(rep.converged);
    EXPECT_LT(rep.residual_history.back(), rep.tol);
    const auto fit = geometric_tail_fit(rep.residual_history);
    if (fit.points < 10) continue;
    ++fits;
    EXPECT_LT(fit.rate, 1.0);
  }
  EXPECT_GT(fits, 0);
}

TEST(EulerL2, FeasibleFieldIsIdentity) {
  CellAverageField<1> f(3, 0.1, std::vector<double>{1, 0, 1, 2, 1, 3, 1, -1, 2});
  const AdmissibleSet g(1e-13);
  auto [x, rep] = dys_l2_euler(f, ConservationTarget<1>::from_field(f), g, 1.0, tight());
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(x.storage(), f.storage());
}

TEST(EulerL2, TwoCellExampleMatchesDualOracle) {
  const AdmissibleSet g(1e-13);
  CellAverageField<1> f(2, 0.5, std::vector<double>{1, 0, -0.5, 1, 0, 2.5});
  ConservationTarget<1> t{{2, 0, 2}};
  auto [x, rep] = dys_l2_euler(f, t, g, 1.0, tight());
  ASSERT_TRUE(rep.converged);
  const auto ref = oracle::l2_euler_by_dual<1>({f.state(0), f.state(1)}, t.totals, g);
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(x(i, c), ref[i].q[c], 1e-8);
  for (int i = 0; i < 2; ++i) EXPECT_TRUE(in_admissible_set(x.state(i), g));
}

TEST(EulerL2, MassOnlyViolation) {
  const double eps = 1e-3;
  const AdmissibleSet g(eps);
  CellAverageField<1> f(2, 0.5, std::vector<double>{eps / 2, 0, 1, 1, 0, 1});
  const auto t = ConservationTarget<1>::from_field(f);
  auto [x, rep] = dys_l2_euler(f, t, g, 1.0, tight());
  ASSERT_TRUE(rep.converged);
  const auto ref = oracle::l2_euler_by_dual<1>({f.state(0), f.state(1)}, t.totals, g);
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(x(i, c), ref[i].q[c], 1e-8);
  EXPECT_NEAR(x(0, 0), eps, 1e-12);
  EXPECT_NEAR(x(1, 0), 1.0 - eps / 2, 1e-12);
}

TEST(EulerL2, RandomInstancesMatchDualOracleAndDrs) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.4);
  const AdmissibleSet g(1e-6);
  for (int t = 0; t < 30; ++t) {
    const std::size_t N = 3 + t % 4;
    CellAverageField<2> f(N, 1.0 / N);
    for (std::size_t i = 0; i < N; ++i)
      f.set_state(i, from_primitive<2>(1.0 + n(rng), {n(rng), n(rng)}, 0.5 + n(rng), 1.4));
    const auto target = ConservationTarget<2>::from_field(f);
    try {
      check_euler_feasible(N, target, g);
    } catch (const InfeasibleProblem&) {
      continue;
    }
    auto [x, rep] = dys_l2_euler(f, target, g, 1.0, tight());
    ASSERT_TRUE(rep.converged);
    std::vector<State2> rows;
    for (std::size_t i = 0; i < N; ++i) rows.push_back(f.state(i));
    const auto ref = oracle::l2_euler_by_dual<2>(rows, target.totals, g);
    for (std::size_t i = 0; i < N; ++i) {
      EXPECT_TRUE(in_admissible_set(x.state(i), g));
      for (int c = 0; c < 4; ++c) EXPECT_NEAR(x(i, c), ref[i].q[c], 1e-8);
    }
    // DRS on the same l2 model: g = fidelity + conservation, h = projection.
    ProxContext ctx;
    ctx.gamma_step = 1.0;
    auto prox_g = [&](const Vec& in, Vec& out) {
      prox_quadratic_affine(in, 4, target.totals, f.storage(), ctx, out);
    };
    auto prox_h = [&](const Vec& in, Vec& out) { prox_invariant_set<2>(in, g, out); };
    auto [xd, rd] = drs_solve(prox_g, prox_h, f.storage(), tight());
    ASSERT_TRUE(rd.converged);
    EXPECT_LT(l2_dist(xd, x.storage()), 1e-8);

    // The l1 minimizer can do no worse in l1 than the l2 minimizer.
    SolverConfig c1 = tight();
    c1.gamma_step = 1e-2;
    auto [x1, r1] = drs_l1_euler(f, target, g, c1);
    ASSERT_TRUE(r1.converged);
    for (std::size_t i = 0; i < N; ++i) EXPECT_TRUE(in_admissible_set(x1.state(i), g));
    EXPECT_LE(l1_dist(x1.storage(), f.storage()), l1_dist(x.storage(), f.storage()) + 1e-9);
  }
}

TEST(EulerL2, InfeasibleTargetsAreRejected) {
  const AdmissibleSet g(1e-3);
  CellAverageField<1> f(2, 0.5, std::vector<double>{-1, 0, 1, 1, 0, 1});
  EXPECT_THROW(dys_l2_euler(f, ConservationTarget<1>::from_field(f), g, 1.0, tight()),
               InfeasibleProblem);
  // Positive mass but mean internal energy below eps.
  CellAverageField<1> h(2, 0.5, std::vector<double>{1, 2, 5e-4, 1, -2, 5e-4});
  EXPECT_THROW(drs_l1_euler(h, ConservationTarget<1>::from_field(h), g, tight()),
               InfeasibleProblem);
}

TEST(TuneGamma, PicksFastestAndBreaksTiesUpward) {
  std::vector<std::function<SolveReport(double)>> samples{[](double g) {
    SolveReport r;
    r.converged = g < 1.0;
    r.iterations = g == 1e-4 ? 10 : (g == 1e-2 ? 10 : 50);
    return r;
  }};
  const std::vector<double> grid{1e-6, 1e-4, 1e-2, 10.0};
  EXPECT_DOUBLE_EQ(tune_gamma(samples, grid), 1e-2);
  const std::vector<double> single{3e-3};
  EXPECT_DOUBLE_EQ(tune_gamma(samples, single), 3e-3);
  const std::vector<double> bad{10.0};
  EXPECT_THROW(tune_gamma(samples, bad), SolverFailure);
}

TEST(TuneGamma, MeasuredSampleOnScalarData) {
  std::mt19937_64 rng(5);
  const auto c = random_scalar(rng, 30);
  std::vector<std::function<SolveReport(double)>> samples{[&](double g) {
    SolverConfig cfg = tight();
    cfg.gamma_step = g;
    cfg.max_iter = 2000;
    return drs_l1_scalar(c.u, c.m, c.M, c.b, cfg).second;
  }};
  const std::vector<double> grid{1e-10, 1e-4, 1e-2, 1.0};
  std::map<double, int> iters;
  for (double g : grid) iters[g] = samples[0](g).iterations;
  const double best = tune_gamma(samples, grid);
  for (double g : grid) EXPECT_LE(iters[best], iters[g]);
}
