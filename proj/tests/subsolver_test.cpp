// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "exgap/subsolver.hpp"
#include "support.hpp"

using namespace exgap;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

ConstrainedProblem line(FunctionSpec f, double b) {
  return ConstrainedProblem({Block{f, FeasibleSet::all(), LinearMap::dense(Mat::Ones(1, 1)).with_norm_sq(1.0)}}, v1(b));
}

double composite_value(const CompositeObjective& o, const ConstrainedProblem& p, const Vec& x) {
  Vec ax = o.A->apply(x);
  return p.objective(x) + o.lin.dot(ax) + 0.5 * o.rho * (ax - o.t).squaredNorm();
}

// Quadratic f = (s/2)||x - c||^2 on R^n: the augmented Lagrangian argmin
// solves (s I + gamma A'A) x = s c - A'y + gamma A'b.
struct QuadCase {
  ConstrainedProblem p;
  Mat a;
  Vec c, y;
  double s;
};

QuadCase quad_case(std::uint64_t seed, Index m, Index n) {
  Rng rng(seed);
  Mat a = gaussian_matrix(rng, m, n);
  Vec c(n), b(m), y(m);
  for (Index i = 0; i < n; ++i) c[i] = rng.normal();
  for (Index j = 0; j < m; ++j) b[j] = rng.normal(), y[j] = rng.normal();
  double s = 0.5 + rng.uniform();
  return {ConstrainedProblem({Block{squared_l2_fn(s, c), FeasibleSet::all(), LinearMap::dense(a)}}, b), a, c, y, s};
}

}  // namespace

TEST(Subsolver, AugLagArgminExample) {
  // f = 0, A = 1, b = 2, y = 0: argmin of (gamma/2)(x - 2)^2 is 2.
  auto p = line(zero_fn(), 2.0);
  auto r = aug_lagrangian_argmin(p, v1(0), 1.0, InnerTolerance{1e-10}, v1(0));
  EXPECT_NEAR(r.x[0], 2.0, 1e-9);
  EXPECT_EQ(r.status, "ok");
}

TEST(Subsolver, AugLagArgminSoftThreshold) {
  // f = |x|, b = 0, y = 3, gamma = 1: argmin |x| + 3x + x^2/2 is -2.
  auto p = line(l1_fn(1, 1.0), 0.0);
  auto r = aug_lagrangian_argmin(p, v1(3), 1.0, InnerTolerance{1e-10}, v1(0));
  EXPECT_NEAR(r.x[0], -2.0, 1e-9);
}

TEST(Subsolver, InexactProxAfExample) {
  // f = 0, xh = 0, yh = -0.5, beta = 0.5, Lbar = 1: x = xh - beta yh / Lbar = 0.25.
  auto p = line(zero_fn(), 0.0);
  auto r = inexact_prox_Af(p, v1(0), v1(-0.5), 0.5, 1.0, InnerTolerance{1e-10}, Vec());
  EXPECT_NEAR(r.x[0], 0.25, 1e-9);
  EXPECT_THROW(inexact_prox_Af(p, v1(0), v1(0), 0.0, 1.0, InnerTolerance{}, Vec()), Error);
}

TEST(Subsolver, FistaMatchesClosedForm) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto q = quad_case(seed, 4, 7);
    double gamma = 0.3 + seed;
    auto r = aug_lagrangian_argmin(q.p, q.y, gamma, InnerTolerance{1e-9}, Vec());
    Mat h = q.s * Mat::Identity(7, 7) + gamma * q.a.transpose() * q.a;
    Vec want = h.ldlt().solve(q.s * q.c - q.a.transpose() * q.y + gamma * q.a.transpose() * q.p.b());
    // Strong convexity s turns the gap into a distance: ||x - x*||^2 <= 2 gap / s.
    EXPECT_LE((r.x - want).squaredNorm(), 2 * r.gap_bound / q.s + 1e-20);
  }
}

TEST(Subsolver, DefaultBudget) {
  auto p = line(zero_fn(), 0.0);
  CompositeObjective obj{p.blocks(), &p.A(), 4.0, v1(0), 1.0, v1(0)};
  EXPECT_EQ(default_inner_budget(obj, 0.1), 200);  // 10 * ceil(sqrt(4/0.01))
  EXPECT_EQ(default_inner_budget(obj, 1e-12), 100000);
}

TEST(Subsolver, BudgetExhaustionThrows) {
  auto p = exgap::testing::random_bounded(4, 30, 12);  // hinge on a box
  CompositeObjective obj{p.blocks(), &p.A(), p.norm_sq(), Vec::Ones(12), 1.0, p.b()};
  try {
    fista_solve(obj, Vec::Zero(30), InnerTolerance{1e-12}, 2);
    FAIL() << "expected inner-budget";
  } catch (const InnerBudgetError& e) {
    EXPECT_EQ(e.code(), "inner-budget");
    EXPECT_EQ(e.result.status, "inner-budget");
    EXPECT_EQ(e.result.iters, 2);
    EXPECT_EQ(e.result.x.size(), 30);
    EXPECT_TRUE(p.in_domain(e.result.x));
  }
}

TEST(Subsolver, Deterministic) {
  auto p = exgap::testing::random_bounded(0, 20, 8);
  auto a = aug_lagrangian_argmin(p, Vec::Ones(8), 2.0, InnerTolerance{1e-8}, Vec());
  auto b = aug_lagrangian_argmin(p, Vec::Ones(8), 2.0, InnerTolerance{1e-8}, Vec());
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iters, b.iters);
  EXPECT_EQ(a.gap_bound, b.gap_bound);
}

TEST(Subsolver, Validation) {
  auto p = line(zero_fn(), 0.0);
  EXPECT_THROW(aug_lagrangian_argmin(p, v1(0), 0.0, InnerTolerance{}, Vec()), Error);
  CompositeObjective obj{p.blocks(), &p.A(), 1.0, v1(0), 1.0, v1(0)};
  EXPECT_THROW(fista_solve(obj, Vec::Zero(2), InnerTolerance{}), Error);
  EXPECT_THROW(fista_solve(obj, v1(0), InnerTolerance{0.0}), Error);
}

TEST(SubsolverProperty, GapBoundIsSound) {
  // F(x) - F* <= gap_bound, with F* from a much tighter solve.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = exgap::testing::random_bounded(seed, 10, 4);
    Rng rng(seed);
    Vec y(4);
    for (Index j = 0; j < 4; ++j) y[j] = rng.normal();
    CompositeObjective obj{p.blocks(), &p.A(), p.norm_sq(), y, 1.5, p.b()};
    auto loose = fista_solve(obj, Vec::Zero(10), InnerTolerance{1e-3});
    auto tight = fista_solve(obj, Vec::Zero(10), InnerTolerance{1e-7});
    double fstar = composite_value(obj, p, tight.x) - tight.gap_bound;
    EXPECT_LE(composite_value(obj, p, loose.x) - fstar, loose.gap_bound + tight.gap_bound + 1e-12) << "seed " << seed;
    EXPECT_TRUE(p.in_domain(loose.x));
  }
}

TEST(SubsolverProperty, MeetsRequestedTolerance) {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    auto p = exgap::testing::random_bounded(seed, 12, 5);
    for (double delta : {1e-2, 1e-4, 1e-6}) {
      auto r = aug_lagrangian_argmin(p, Vec::Zero(5), 1.0, InnerTolerance{delta}, Vec());
      if (!r.polished) EXPECT_LE(r.gap_bound, std::max(0.5 * delta * delta, 1e-9)) << "seed " << seed;
    }
  }
}
