#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "idp/cubic.hpp"

using idp::CubicRoots;
using idp::solve_depressed_cubic;

namespace {

double residual(double x, double p, double q) {
  const double scale = std::max({1.0, std::abs(x * x * x), std::abs(p * x), std::abs(q)});
  return std::abs((x * x + p) * x + q) / scale;
}

// Real roots from the companion polynomial via sign-change scanning and
// bisection, used as an independent count.
int count_real_roots_by_sign_changes(double p, double q) {
  // Critical points at +-sqrt(-p/3) when p < 0; the cubic is monotone otherwise.
  if (p >= 0.0) return 1;
  const double c = std::sqrt(-p / 3.0);
  const double f1 = (c * c + p) * (-c) + q;  // value at -c (local max)
  const double f2 = (c * c + p) * c + q;     // value at +c (local min)
  if (f1 > 0.0 && f2 < 0.0) return 3;
  return 1;
}

}  // namespace

TEST(Cubic, TripleRoot) {
  auto r = solve_depressed_cubic(0.0, 0.0);
  EXPECT_EQ(r.kind, CubicRoots::Kind::Triple);
  ASSERT_EQ(r.count, 1u);
  EXPECT_EQ(r.roots[0], 0.0);
}

TEST(Cubic, KnownRoots) {
  // (x-1)(x-2)(x+3) = x^3 - 7x + 6
  auto r = solve_depressed_cubic(-7.0, 6.0);
  ASSERT_EQ(r.count, 3u);
  std::vector<double> v(r.begin(), r.end());
  std::sort(v.begin(), v.end());
  EXPECT_NEAR(v[0], -3.0, 1e-13);
  EXPECT_NEAR(v[1], 1.0, 1e-13);
  EXPECT_NEAR(v[2], 2.0, 1e-13);
  // x^3 + x - 2 = (x - 1)(x^2 + x + 2)
  auto s = solve_depressed_cubic(1.0, -2.0);
  ASSERT_EQ(s.count, 1u);
  EXPECT_NEAR(s.roots[0], 1.0, 1e-14);
}

TEST(Cubic, DoubleRoot) {
  // (x-1)^2 (x+2) = x^3 - 3x + 2: discriminant 4(-27) + 27*4 = 0 exactly.
  auto r = solve_depressed_cubic(-3.0, 2.0);
  EXPECT_EQ(r.kind, CubicRoots::Kind::DoubleAndSimple);
  ASSERT_EQ(r.count, 2u);
  EXPECT_DOUBLE_EQ(r.roots[0], 2.0 * 3.0 / -3.0);
  EXPECT_DOUBLE_EQ(r.roots[1], 1.0);
}

TEST(Cubic, RandomResidualAndRootCount) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_real_distribution<double> e(-8.0, 8.0);
  int checked = 0;
  for (int i = 0; i < 100000; ++i) {
    double p = n(rng), q = n(rng);
    if (i % 4 == 1) p *= std::pow(10.0, e(rng));
    if (i % 4 == 2) q *= std::pow(10.0, e(rng));
    const auto r = solve_depressed_cubic(p, q);
    ASSERT_GE(r.count, 1u);
    for (double x : r) ASSERT_LT(residual(x, p, q), 1e-12) << "p=" << p << " q=" << q << " x=" << x;
    const double disc = 4 * p * p * p + 27 * q * q;
    if (std::abs(disc) > 1e-6 * (4 * std::abs(p * p * p) + 27 * q * q)) {
      EXPECT_EQ(static_cast<int>(r.count), count_real_roots_by_sign_changes(p, q));
      ++checked;
    }
  }
  EXPECT_GT(checked, 90000);
}

TEST(Cubic, NearCaseBoundaries) {
  // Perturbations of the double-root family p = -3 t^2, q = 2 t^3.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double t = std::pow(10.0, 4.0 * u(rng));
    const double p = -3.0 * t * t * (1.0 + 1e-10 * u(rng));
    const double q = 2.0 * t * t * t * (1.0 + 1e-10 * u(rng));
    const auto r = solve_depressed_cubic(p, q);
    for (double x : r) ASSERT_LT(residual(x, p, q), 1e-9);
  }
  // Tiny p with moderate q, and vice versa.
  for (double p : {1e-300, -1e-300, 1e-20, -1e-20})
    for (double q : {1.0, -1.0, 1e-30}) {
      const auto r = solve_depressed_cubic(p, q);
      for (double x : r) EXPECT_LT(residual(x, p, q), 1e-12) << p << " " << q;
    }
}

TEST(Cubic, ThreeSimpleRootsAroundZero) {
  // x^3 - x = x (x - 1) (x + 1)
  const auto r = solve_depressed_cubic(-1.0, 0.0);
  EXPECT_EQ(r.kind, CubicRoots::Kind::ThreeDistinct);
  ASSERT_EQ(r.count, 3u);
  std::vector<double> v(r.begin(), r.end());
  std::sort(v.begin(), v.end());
  EXPECT_NEAR(v[0], -1.0, 1e-14);
  EXPECT_NEAR(v[1], 0.0, 1e-14);
  EXPECT_NEAR(v[2], 1.0, 1e-14);
  for (double x : v) EXPECT_LE(std::abs(x * x * x - x), 1e-9);
}

TEST(Cubic, RoundedDoubleRootFamilyStaysFinite) {
  // Rounded p = -3t^2, q = 2t^3 can give a tiny positive discriminant.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> ts{-0.084844501251839052, 23.912882996369984, -6930.6974891653917};
  for (int i = 0; i < 20000; ++i) ts.push_back(std::pow(10.0, 4.0 * u(rng)) * (i % 2 ? 1.0 : -1.0));
  for (double t : ts) {
    const double p = -3.0 * t * t, q = 2.0 * t * t * t;
    const auto r = solve_depressed_cubic(p, q);
    bool has_simple = false;
    for (double x : r) {
      ASSERT_TRUE(std::isfinite(x)) << "t=" << t;
      EXPECT_LT(residual(x, p, q), 1e-12) << "t=" << t;
      has_simple = has_simple || std::abs(x + 2.0 * t) <= 1e-9 * std::abs(t);
    }
    EXPECT_TRUE(has_simple) << "t=" << t;
  }
}
