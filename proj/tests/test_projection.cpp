#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "idp/projection.hpp"
#include "oracles.hpp"

using namespace idp;

namespace {

double dist2(const State1& a, double u, double v, double w) {
  return (a.rho() - u) * (a.rho() - u) + (a.momentum(0) - v) * (a.momentum(0) - v) +
         (a.energy() - w) * (a.energy() - w);
}

class ProjectionTest : public ::testing::Test {
 protected:
  void SetUp() override { projection_diagnostics().reset(); }
  void TearDown() override { EXPECT_EQ(projection_diagnostics().fallback_events.load(), 0u); }
};

}  // namespace

TEST_F(ProjectionTest, AdmissibleInputIsReturnedUnchanged) {
  const AdmissibleSet g(1e-13);
  const State1 s(1.0, {0.5}, 2.0);
  ProjectionCase c{};
  EXPECT_EQ(project(s, g, &c), s);
  EXPECT_EQ(c, ProjectionCase::Case2);
}

TEST_F(ProjectionTest, DensityClampCase) {
  const AdmissibleSet g(0.1);
  // rho below eps, energy large enough for the clamp to be admissible.
  const auto p = project_1d(-1.0, 0.2, 5.0, g);
  EXPECT_DOUBLE_EQ(p.rho(), 0.1);
  EXPECT_DOUBLE_EQ(p.momentum(0), 0.2);
  EXPECT_DOUBLE_EQ(p.energy(), 5.0);
}

TEST_F(ProjectionTest, CornerAndAxisCases) {
  const AdmissibleSet g(0.1);
  ProjectionCase c{};
  auto corner = project(State1(-1.0, {0.0}, -1.0), g, &c);
  EXPECT_EQ(c, ProjectionCase::Case3_v0);
  EXPECT_DOUBLE_EQ(corner.rho(), 0.1);
  EXPECT_DOUBLE_EQ(corner.energy(), 0.1);
  auto axis = project(State1(2.0, {0.0}, -1.0), g, &c);
  EXPECT_EQ(c, ProjectionCase::Case4_v0);
  EXPECT_DOUBLE_EQ(axis.rho(), 2.0);
  EXPECT_DOUBLE_EQ(axis.energy(), 0.1);
}

TEST_F(ProjectionTest, MatchesBruteForceOracle1D) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 2.0);
  for (double eps : {1e-13, 1e-3, 0.5}) {
    const AdmissibleSet g(eps);
    int outside = 0;
    for (int i = 0; i < 150; ++i) {
      const double u = n(rng), v = n(rng), w = n(rng);
      const auto p = project_1d(u, v, w, g);
      ASSERT_TRUE(in_admissible_set(p, g));
      const auto o = oracle::project_1d(u, v, w, eps);
      const double dp = dist2(p, u, v, w);
      const double dor = oracle::squared_distance_1d(o, u, v, w);
      EXPECT_LE(dp, dor + 1e-8) << u << " " << v << " " << w;
      EXPECT_NEAR(p.rho(), o.rho, 1e-5) << u << " " << v << " " << w << " eps=" << eps;
      EXPECT_NEAR(p.momentum(0), o.m, 1e-5);
      EXPECT_NEAR(p.energy(), o.energy, 1e-5);
      EXPECT_LT(kkt_residual(State1(u, {v}, w), p, g), 1e-9);
      outside += !in_admissible_set(State1(u, {v}, w), g);
    }
    EXPECT_GT(outside, 30);
  }
}

TEST_F(ProjectionTest, TwoDimensionalReducesToOneDimensional) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 2.0);
  const AdmissibleSet g(1e-13);
  for (int i = 0; i < 20000; ++i) {
    const double u = n(rng), v1 = n(rng), v2 = n(rng), w = n(rng);
    const auto p2 = project_2d(u, v1, v2, w, g);
    ASSERT_TRUE(in_admissible_set(p2, g));
    const double r = std::hypot(v1, v2);
    const auto p1 = project_1d(u, r, w, g);
    const double scale = std::max(1.0, std::abs(p1.momentum(0)));
    EXPECT_NEAR(p2.rho(), p1.rho(), 1e-9 * std::max(1.0, p1.rho()));
    EXPECT_NEAR(p2.energy(), p1.energy(), 1e-9 * std::max(1.0, std::abs(p1.energy())));
    if (r > 0) {
      EXPECT_NEAR(p2.momentum(0), p1.momentum(0) * v1 / r, 1e-9 * scale);
      EXPECT_NEAR(p2.momentum(1), p1.momentum(0) * v2 / r, 1e-9 * scale);
    }
    EXPECT_LT(std::abs(p2.momentum(0) * v2 - p2.momentum(1) * v1),
              1e-10 * std::max(1.0, r * r));
    EXPECT_LT(kkt_residual(State2(u, {v1, v2}, w), p2, g), 1e-9);
  }
}

TEST_F(ProjectionTest, IdempotentAndNonExpansive) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 3.0);
  const AdmissibleSet g(1e-2);
  for (int i = 0; i < 20000; ++i) {
    const State2 a(n(rng), {n(rng), n(rng)}, n(rng));
    const State2 b(n(rng), {n(rng), n(rng)}, n(rng));
    const auto pa = project(a, g), pb = project(b, g);
    EXPECT_EQ(project(pa, g), pa);
    double dp = 0, d = 0;
    for (int c = 0; c < 4; ++c) {
      dp += (pa.q[c] - pb.q[c]) * (pa.q[c] - pb.q[c]);
      d += (a.q[c] - b.q[c]) * (a.q[c] - b.q[c]);
    }
    EXPECT_LE(std::sqrt(dp), std::sqrt(d) * (1 + 1e-10) + 1e-10);
  }
}

TEST_F(ProjectionTest, ExtremeScales) {
  const AdmissibleSet g(1e-13);
  const double cases[][3] = {
      {1e-14, 1e6, 1e-3},   {5.0, 4000.0, -1e5},   {1e-20, -1e-10, -1e-20},
      {-1e8, 1e8, 1e8},     {1e-13, 1e-13, 0.0},   {0.0, 0.0, 0.0},
      {1e10, 1e-10, -1e10}, {-3.0, 1e-300, -2.0},  {2.0, 3.0, 2.25},
  };
  for (const auto& c : cases) {
    const auto p = project_1d(c[0], c[1], c[2], g);
    EXPECT_TRUE(in_admissible_set(p, g)) << c[0] << " " << c[1] << " " << c[2];
    EXPECT_TRUE(p.finite());
    const auto p2 = project_2d(c[0], c[1], -0.5 * c[1], c[2], g);
    EXPECT_TRUE(in_admissible_set(p2, g));
  }
}

TEST_F(ProjectionTest, CandidatesAreListed) {
  const AdmissibleSet g(1e-3);
  const auto cands = projection_candidates(State1(0.5, {2.0}, 0.1), g);
  ASSERT_FALSE(cands.empty());
  for (const auto& c : cands) EXPECT_NE(c.case_id, ProjectionCase::Fallback);
}

TEST_F(ProjectionTest, TinyMomentumWithLargeEnergyDeficit) {
  // With |m| tiny the density barely moves and mu = eps - E to first order,
  // so the momentum is y x / (x + eps - E). Such inputs put the closed form
  // near a double root.
  const AdmissibleSet g(1e-13);
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> ux(0.05, 2.0), um(-1e-7, 1e-7), ue(-1.0, -1e-3);
  for (int i = 0; i < 5000; ++i) {
    const double x = ux(rng), y = um(rng), z = ue(rng);
    const State1 in(x, {y}, z);
    const auto p = project(in, g);
    ASSERT_TRUE(in_admissible_set(p, g));
    EXPECT_LT(kkt_residual(in, p, g), 1e-12) << x << " " << y << " " << z;
    EXPECT_NEAR(p.momentum(0), y * x / (x + g.epsilon - z), 1e-6 * std::abs(y));
    EXPECT_NEAR(p.rho(), x, 1e-12);
  }
  const State1 seen(0.18238594089716498, {3.1755866710609232e-08}, -0.19999998984267447);
  EXPECT_LT(kkt_residual(seen, project(seen, g), g), 1e-12);
}
