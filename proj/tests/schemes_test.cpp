// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "exgap/problems.hpp"
#include "exgap/schemes.hpp"
#include "support.hpp"

using namespace exgap;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

// X = [-1, 1], A = 1, b = 0.5, f = 0, L = 1.
ConstrainedProblem toy() {
  return ConstrainedProblem(
      {Block{zero_fn(), FeasibleSet::box(v1(-1), v1(1)), LinearMap::dense(Mat::Ones(1, 1)).with_norm_sq(1.0)}}, v1(0.5));
}

SolverState start(const SolverContext& c, double gamma0, double c0, ScheduleVariant v) {
  Counters ops;
  auto sch = init_schedule(v, c0, gamma0, c.sm.L_bar);
  SolverState s = start_point(c, sch.gamma, sch.beta, StartVariant::PrimalFirst, ops);
  s.sch = sch;
  return s;
}

SolverConfig fixed_run(Scheme s, int iters) {
  SolverConfig cfg;
  cfg.scheme = s;
  cfg.max_iter = iters;
  cfg.stop_on_tolerance = false;
  return cfg;
}

}  // namespace

TEST(Schemes, StartPointExample) {
  SolverConfig cfg;
  cfg.scheme = Scheme::TwoP1D;
  auto p = toy();
  auto c = make_context(p, cfg);
  Counters ops;
  auto s = start_point(c, 1.0, 1.0, StartVariant::PrimalFirst, ops);
  EXPECT_EQ(s.x[0], 0.0);
  EXPECT_EQ(s.y[0], -0.5);
  EXPECT_EQ(ops.prox, 1);
  // DualFirst: y0 = (A xc - b)/beta0 = -0.5, x0 = clamp(xc - beta0 A' y0 / L) = 0.5.
  Counters ops2;
  auto d = start_point(c, 1.0, 1.0, StartVariant::DualFirst, ops2);
  EXPECT_EQ(d.y[0], -0.5);
  EXPECT_EQ(d.x[0], 0.5);
  EXPECT_THROW(start_point(c, 1.0, 0.5, StartVariant::PrimalFirst, ops), Error);
}

TEST(Schemes, TwoP1DHandStep) {
  SolverConfig cfg;
  cfg.scheme = Scheme::TwoP1D;
  auto p = toy();
  auto c = make_context(p, cfg);
  EXPECT_EQ(c.gamma0, 1.0);
  EXPECT_EQ(c.c0, 1.0);
  auto s = start(c, 1.0, 1.0, ScheduleVariant::Generic2P1D);
  step_2p1d(c, s);
  EXPECT_DOUBLE_EQ(s.x[0], 0.5);
  EXPECT_DOUBLE_EQ(s.y[0], -0.5);
  EXPECT_DOUBLE_EQ(s.sch.gamma, 0.5);
  EXPECT_DOUBLE_EQ(s.sch.beta, 0.5);
  EXPECT_EQ(s.k, 1);
}

TEST(Schemes, OneP2DHandStep) {
  SolverConfig cfg;
  cfg.scheme = Scheme::OneP2D;
  cfg.K_total = 10;
  cfg.gamma0 = 1.0;
  auto p = toy();
  auto c = make_context(p, cfg);
  EXPECT_EQ(c.c0, 0.0);
  auto s = start(c, 1.0, 0.0, ScheduleVariant::Generic1P2D);
  const double tau0 = 2.0 / (1.0 + std::sqrt(5.0));
  step_1p2d(c, s);
  EXPECT_NEAR(s.x[0], tau0 * 0.5, 1e-15);
  EXPECT_NEAR(s.y[0], -0.5, 1e-15);
  EXPECT_NEAR(s.sch.beta, 1 - tau0, 1e-15);
  EXPECT_NEAR(s.sch.gamma, 1.0, 1e-15);
}

TEST(Schemes, CostRows) {
  auto p = exgap::testing::random_bounded(0, 10, 4);
  auto row = [&](SolverConfig cfg) {
    Trace tr = solve(p, cfg);
    EXPECT_EQ(tr.step_ops.size(), 5u);
    for (const auto& o : tr.step_ops) EXPECT_EQ(o.prox, tr.step_ops[0].prox);
    return std::array<long, 3>{tr.step_ops[0].prox, tr.step_ops[0].A, tr.step_ops[0].At};
  };
  auto cfg = fixed_run(Scheme::TwoP1D, 5);
  EXPECT_EQ(row(cfg), (std::array<long, 3>{2, 2, 1}));
  cfg.scheme = Scheme::OneP2D;
  cfg.K_total = 5;
  EXPECT_EQ(row(cfg), (std::array<long, 3>{1, 1, 1}));
  cfg.certify = true;
  EXPECT_EQ(row(cfg), (std::array<long, 3>{2, 2, 2}));
}

TEST(Schemes, MaxIterZero) {
  auto p = exgap::testing::random_bounded(1, 8, 3);
  Trace tr = solve(p, fixed_run(Scheme::TwoP1D, 0));
  ASSERT_EQ(tr.records.size(), 1u);
  EXPECT_EQ(tr.records[0].k, 0);
  EXPECT_EQ(tr.status, Status::MaxIter);
  EXPECT_TRUE(tr.step_ops.empty());
}

TEST(Schemes, ValidateErrors) {
  auto expect_code = [](const ConstrainedProblem& p, const SolverConfig& cfg, const std::string& code) {
    try {
      validate_config(p, cfg);
      ADD_FAILURE() << "expected " << code;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  auto p = exgap::testing::random_bounded(3, 6, 2);
  SolverConfig cfg;
  cfg.scheme = Scheme::I1P2D;
  cfg.smoother = SmootherKind::Bregman;
  expect_code(p, cfg, "scheme-smoother");
  cfg.scheme = Scheme::OneP2D_LG;
  cfg.smoother = SmootherKind::AugLag;
  expect_code(p, cfg, "scheme-smoother");
  cfg = {};
  cfg.scheme = Scheme::TwoP1D_SC;
  expect_code(p, cfg, "needs-strong-convexity");
  cfg.scheme = Scheme::ADMM_New;
  expect_code(p, cfg, "needs-two-blocks");
  cfg = {};
  cfg.scheme = Scheme::OneP2D;
  expect_code(p, cfg, "missing-K");
  cfg.K_total = 10;
  cfg.max_iter = -1;
  expect_code(p, cfg, "bad-config");
  cfg.max_iter = 10;
  cfg.c_policy.c = 1.5;
  expect_code(p, cfg, "bad-c");
  cfg.c_policy.c.reset();
  cfg.delta0 = 0;
  expect_code(p, cfg, "bad-config");
  auto q = exgap::testing::random_bounded(3, 6, 2, true);
  cfg = {};
  cfg.scheme = Scheme::TwoP1D;
  cfg.smoother = SmootherKind::AugLag;
  expect_code(q, cfg, "sense");
  EXPECT_THROW(scheme_from_string("three_p"), Error);
  EXPECT_EQ(scheme_from_string("padmm_new"), Scheme::PADMM_New);
}

TEST(Schemes, DualUpdateInequality) {
  Vec v = (Vec(3) << -1, 0, 2).finished();
  EXPECT_EQ(dual_update_inequality(v), (Vec(3) << 0, 0, 2).finished());
  EXPECT_EQ(feasibility(ConstraintSense::Inequality, v), 2.0);
  EXPECT_EQ(feasibility(ConstraintSense::Equality, v), std::sqrt(5.0));
}

TEST(Schemes, CertificateDisabledWhenTuned) {
  auto p = exgap::testing::random_bounded(0, 8, 3);
  auto cfg = fixed_run(Scheme::TwoP1D, 3);
  cfg.gamma0 = 0.3;
  Trace tr = solve(p, cfg);
  EXPECT_FALSE(tr.certifiable);
  EXPECT_FALSE(tr.disabled_reason.empty());
  cfg.gamma0.reset();
  cfg.c_policy.kind = CPolicy::Kind::Kick;
  tr = solve(p, cfg);
  EXPECT_FALSE(tr.certifiable);
  EXPECT_EQ(tr.disabled_reason, "tuned c policy");
}

TEST(SchemesProperty, IteratesStayInBox) {
  const Scheme generic[] = {Scheme::TwoP1D, Scheme::OneP2D, Scheme::OneP2D_LG};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = exgap::testing::random_bounded(seed, 9, 4, seed % 2 == 1);
    for (Scheme s : generic) {
      auto cfg = fixed_run(s, 30);
      cfg.K_total = 30;
      Trace tr = solve(p, cfg);
      EXPECT_TRUE(p.in_domain(tr.x)) << to_string(s) << " seed " << seed;
      for (const auto& r : tr.records) EXPECT_TRUE(std::isfinite(r.f_val)) << to_string(s) << " seed " << seed;
      if (p.sense() == ConstraintSense::Inequality)
        EXPECT_TRUE((tr.y.array() >= 0).all()) << to_string(s) << " seed " << seed;
    }
  }
}

TEST(SchemesProperty, WeakDualitySandwich) {
  // f(xbar) - f* >= -||y*|| ||A xbar - b|| for every record.
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto p = make_group_bp(seed, 10, 24, 6, GroupBox::Tight);
    p.reference = reference_self_solve(p);
    const double ny = p.reference->y.norm();
    for (Scheme s : {Scheme::TwoP1D, Scheme::OneP2D}) {
      auto cfg = fixed_run(s, 100);
      cfg.K_total = 100;
      Trace tr = solve(p, cfg);
      for (const auto& r : tr.records)
        EXPECT_GE(r.obj_residual, -ny * r.feas_abs - 1e-7) << to_string(s) << " k=" << r.k;
    }
  }
}

TEST(SchemesProperty, Deterministic) {
  auto p = exgap::testing::random_bounded(2, 10, 4);
  auto cfg = fixed_run(Scheme::TwoP1D, 20);
  Trace a = solve(p, cfg), b = solve(p, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].f_val, b.records[i].f_val);
    EXPECT_EQ(a.records[i].feas_abs, b.records[i].feas_abs);
  }
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
}

TEST(SchemesProperty, GapNonpositiveAlongTwoP1D) {
  // Certification: G_k <= 0 at every record of a certifiable Bregman 2P1D run.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = exgap::testing::random_bounded(seed, 8, 3);
    auto cfg = fixed_run(Scheme::TwoP1D, 40);
    cfg.certify = true;
    Trace tr = solve(p, cfg);
    ASSERT_TRUE(tr.certifiable);
    EXPECT_NE(tr.status, Status::CertificateFailed);
    for (const auto& r : tr.records)
      EXPECT_LE(r.smoothed_gap, 1e-9 * (1 + std::abs(r.f_val))) << "seed " << seed << " k=" << r.k;
  }
}
