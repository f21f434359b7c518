// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "exgap/prox.hpp"
#include "exgap/schedule.hpp"

using namespace exgap;

TEST(Schedule, InitA) {
  EXPECT_EQ(init_a(1.0), 2.0);
  EXPECT_NEAR(init_a(0.0), 1.618033988749895, 1e-15);
  EXPECT_EQ(init_a(-0.5), 1.5);
  for (double bad : {-1.0, 1.5, std::nan("")}) {
    try {
      init_a(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "bad-c");
    }
  }
}

TEST(Schedule, NextA) {
  EXPECT_EQ(next_a(2.0, 1.0), 3.0);
  EXPECT_NEAR(next_a(init_a(0.0), 0.0), 2.1935, 5e-5);
  EXPECT_NEAR(next_a(10.0, 0.0), 10.512, 5e-4);
}

TEST(Schedule, InitSchedule) {
  auto s = init_schedule(ScheduleVariant::Generic2P1D, 1.0, 2.0, 8.0);
  EXPECT_EQ(s.a, 2.0);
  EXPECT_EQ(s.tau, 0.5);
  EXPECT_EQ(s.gamma, 2.0);
  EXPECT_EQ(s.beta, 4.0);
  EXPECT_EQ(s.k, 0);
}

TEST(Schedule, UpdateGammaBeta) {
  auto s = init_schedule(ScheduleVariant::Generic2P1D, 1.0, 1.0, 1.0);
  auto t = update_gamma_beta(s);
  EXPECT_EQ(t.beta, 0.5);
  EXPECT_EQ(t.gamma, 0.5);
  s.gamma = 1e-3;
  try {
    update_gamma_beta(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "contraction-broken");
  }
}

TEST(Schedule, Kick) {
  auto s = init_schedule(ScheduleVariant::Generic2P1D, 1.0, 1.0, 1.0);
  auto k = kick_gamma(s, 20.0, 1.0, 10.0, 1.02);
  EXPECT_DOUBLE_EQ(update_gamma_beta(k).gamma, 1.02);
  EXPECT_EQ(k.c_base, 1.0);
  EXPECT_EQ(kick_gamma(s, 5.0, 1.0, 10.0).c, 1.0);
  EXPECT_EQ(kick_gamma(s, 1e9, 1.0, kInf).c, 1.0);
}

TEST(Schedule, StronglyConvexTau) {
  EXPECT_NEAR(sc_tau0(), 0.6180339887498949, 1e-15);
  EXPECT_NEAR(sc_next_tau(sc_tau0()), 0.455887, 5e-7);
}

TEST(Schedule, LipschitzGradientUpdate) {
  auto r = lg_update(0, 1.0, 1.0, 1.0);
  EXPECT_EQ(r.tau, 0.5);
  EXPECT_DOUBLE_EQ(r.gamma, 2.0 / 3.0);
  EXPECT_EQ(r.beta, 0.5);
  EXPECT_THROW(lg_update(-1, 1.0, 1.0, 1.0), Error);
  EXPECT_THROW(lg_update(0, 0.1, 0.1, 1.0), Error);
}

TEST(Schedule, AdmmParams) {
  auto p0 = admm_params(0, 3.0);
  EXPECT_EQ(p0.tau, 0.75);
  EXPECT_EQ(p0.gamma, 3.0);
  EXPECT_DOUBLE_EQ(p0.beta, 9.0 / 7.0);
  EXPECT_EQ(p0.rho, 0.75);
  EXPECT_EQ(p0.eta, 1.0);
  auto p2 = admm_params(2, 3.0);
  EXPECT_EQ(p2.tau, 0.5);
  EXPECT_EQ(p2.gamma, 1.5);
  EXPECT_DOUBLE_EQ(p2.beta, 5.0 / 9.0);
  EXPECT_DOUBLE_EQ(p2.rho, 0.3);
  EXPECT_DOUBLE_EQ(p2.eta, 0.6);
  EXPECT_THROW(admm_params(0, 0.0), Error);
}

TEST(Schedule, BetaClosedForms) {
  EXPECT_EQ(beta_c1(0, 1.0), 0.5);
  EXPECT_EQ(beta_c0_lo(0, 1.0), 0.25);
  EXPECT_EQ(beta_c0_hi(1, 1.0), 1.0);
}

TEST(ScheduleProperty, ContractionInvariant) {
  // beta_{k+1} gamma_{k+1} = Lbar tau_k^2 along the generic recursion.
  for (double c : {0.0, 0.25, 0.5, 1.0})
    for (double L : {1.0, 37.5}) {
      auto s = init_schedule(ScheduleVariant::Generic2P1D, c, std::sqrt(L), L);
      for (int k = 0; k < 2000; ++k) {
        double tau = s.tau;
        s = advance(s, c);
        double rhs = L * tau * tau;
        ASSERT_NEAR(s.beta * s.gamma, rhs, 1e-10 * rhs) << "c=" << c << " k=" << k;
        ASSERT_GT(s.tau, 0.0);
        ASSERT_LT(s.tau, 1.0);
      }
    }
}

TEST(ScheduleProperty, COneIsLinear) {
  auto s = init_schedule(ScheduleVariant::Generic2P1D, 1.0, 1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    ASSERT_EQ(s.a, k + 2.0);
    s = advance(s, 1.0);
    ASSERT_NEAR(s.beta, beta_c1(k, 1.0), 1e-13 * beta_c1(k, 1.0));
  }
}

TEST(ScheduleProperty, CZeroBetaEnvelope) {
  auto s = init_schedule(ScheduleVariant::Generic1P2D, 0.0, 1.0, 1.0);
  double beta0 = s.beta;
  for (int k = 0; k < 1000; ++k) {
    s = advance(s, 0.0);
    ASSERT_GE(s.beta, beta_c0_lo(k, beta0) * (1 - 1e-12));
    ASSERT_LE(s.beta, beta_c0_hi(k, beta0) * (1 + 1e-12));
  }
}

TEST(ScheduleProperty, RateBounds) {
  // With constant c, s_k = k c.
  for (double c : {0.0, 0.5, 1.0}) {
    auto s = init_schedule(ScheduleVariant::Generic2P1D, c, 1.0, 2.0);
    const double a0 = s.a;
    for (int k = 0; k < 1000; ++k) {
      auto rb = rate_bounds(k, a0, k * c, 2.0);
      ASSERT_GE(s.a, rb.a_lo * (1 - 1e-12)) << "c=" << c << " k=" << k;
      ASSERT_LE(s.a, rb.a_hi * (1 + 1e-12)) << "c=" << c << " k=" << k;
      s = advance(s, c);
      ASSERT_GE(s.beta * s.gamma, rb.bg_lo * (1 - 1e-12));
      ASSERT_LE(s.beta * s.gamma, rb.bg_hi * (1 + 1e-12));
    }
  }
}

TEST(ScheduleProperty, StronglyConvexTauIdentity) {
  // tau_{k+1}^2 = (1 - tau_{k+1}) tau_k^2, and tau_k stays in (0, 2/(k+2)].
  double tau = sc_tau0();
  for (int k = 0; k < 5000; ++k) {
    double tn = sc_next_tau(tau);
    ASSERT_NEAR(tn * tn, (1 - tn) * tau * tau, 1e-15);
    ASSERT_GT(tn, 0.0);
    ASSERT_LT(tn, tau);
    ASSERT_LE(tn, 2.0 / (k + 3.0));
    tau = tn;
  }
}

TEST(ScheduleProperty, LipschitzGradientChain) {
  double gamma = 1.0, beta = 3.0;
  for (int k = 0; k < 5000; ++k) {
    auto r = lg_update(k, gamma, beta, 3.0);
    ASSERT_LT(r.gamma, gamma);
    ASSERT_LT(r.beta, beta);
    gamma = r.gamma;
    beta = r.beta;
  }
}

TEST(ScheduleProperty, AdmmPositiveAndDecreasing) {
  for (double g0 : {0.1, 3.0, 50.0}) {
    auto prev = admm_params(0, g0);
    for (int k = 1; k < 10000; ++k) {
      auto p = admm_params(k, g0);
      ASSERT_GT(p.tau, 0.0);
      ASSERT_LT(p.tau, 1.0);
      ASSERT_GT(p.gamma, 0.0);
      ASSERT_GT(p.beta, 0.0);
      ASSERT_GT(p.rho, 0.0);
      ASSERT_GT(p.eta, 0.0);
      ASSERT_LT(p.tau, prev.tau);
      ASSERT_LT(p.gamma, prev.gamma);
      prev = p;
    }
  }
}
