// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "exgap/problems.hpp"

using namespace exgap;

TEST(Problems, RngIsReproducible) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(Rng(42).next_u64(), c.next_u64());
  EXPECT_EQ(a.counter(), 100u);
}

TEST(Problems, RngMoments) {
  Rng r(1);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  std::vector<int> hist(10, 0);
  for (int i = 0; i < n; ++i) ++hist[r.below(10)];
  for (int h : hist) EXPECT_NEAR(h, n / 10, n / 100);
}

TEST(Problems, NormPpf) {
  EXPECT_NEAR(norm_ppf(0.975), 1.959963984540054, 1e-9);
  EXPECT_NEAR(norm_ppf(0.5), 0.0, 1e-12);
  EXPECT_NEAR(norm_ppf(0.01), -norm_ppf(0.99), 1e-9);
  EXPECT_NEAR(norm_ppf(1e-6), -4.753424308822899, 1e-7);
  EXPECT_NEAR(sqrt_lasso_lambda(100), 1.1 * norm_ppf(1 - 0.00025), 1e-15);
}

TEST(Problems, SameSeedSameInstance) {
  auto a = make_basis_pursuit(5, 10, 30, 3), b = make_basis_pursuit(5, 10, 30, 3), c = make_basis_pursuit(6, 10, 30, 3);
  EXPECT_EQ(a.A().to_dense(), b.A().to_dense());
  EXPECT_EQ(a.b(), b.b());
  EXPECT_NE(a.A().to_dense(), c.A().to_dense());
  EXPECT_EQ(a.meta.seed, 5u);
  EXPECT_EQ(a.meta.family, "basis_pursuit");
}

TEST(Problems, PlantedRhs) {
  auto p = make_basis_pursuit(1, 12, 40, 4);
  EXPECT_LE((p.A().apply(p.meta.planted) - p.b()).norm(), 1e-12 * (1 + p.b().norm()));
  int nnz = 0;
  for (Index i = 0; i < 40; ++i) nnz += p.meta.planted[i] != 0.0;
  EXPECT_EQ(nnz, 4);
  auto noisy = make_basis_pursuit(1, 12, 40, 4, DataOptions{0.0, 0.1});
  EXPECT_EQ(noisy.A().to_dense(), p.A().to_dense());
  double rel = (noisy.b() - p.b()).norm() / p.b().norm();
  EXPECT_GT(rel, 0.02);
  EXPECT_LT(rel, 0.3);
}

TEST(Problems, Correlation) {
  auto p = make_basis_pursuit(3, 30, 40, 2, DataOptions{0.5, 0.0});
  Mat a = p.A().to_dense();
  for (Index j = 0; j < a.cols(); ++j) EXPECT_NEAR(a.col(j).norm(), 1.0, 1e-14);
  double mean_cos = 0;
  for (Index j = 1; j < a.cols(); ++j) mean_cos += a.col(0).dot(a.col(j)) / (a.col(0).norm() * a.col(j).norm());
  EXPECT_GT(mean_cos / double(a.cols() - 1), 0.4);
}

TEST(Problems, GroupsPartition) {
  Rng rng(8);
  auto g = random_groups(rng, 23, 5);
  std::vector<int> size(5, 0);
  for (int id : g) ++size[id];
  for (int s : size) {
    EXPECT_GE(s, 4);
    EXPECT_LE(s, 5);
  }
  auto p = make_group_bp(4, 20, 64, 16);
  const auto& blk = p.block(0);
  std::set<int> active;
  for (Index i = 0; i < 64; ++i)
    if (p.meta.planted[i] != 0) active.insert(blk.f.group_of[i]);
  EXPECT_EQ(active.size(), 2u);
  EXPECT_TRUE(blk.set.contains(p.meta.planted));
  EXPECT_TRUE(blk.set.bounded());
  EXPECT_EQ(blk.f.weights, Vec::Ones(16));
}

TEST(Problems, ElasticNetIsStronglyConvex) {
  auto p = make_elastic_net(2, 10, 30, 3, 0.5);
  EXPECT_EQ(p.sigma_f(), 0.5);
  EXPECT_EQ(p.meta.family, "elastic_net");
  auto q = make_elastic_net(2, 10, 30, 3, 0.0);
  EXPECT_EQ(q.meta.family, "basis_pursuit");
  EXPECT_THROW(make_elastic_net(2, 10, 30, 3, -1), Error);
}

TEST(Problems, SqrtLassoSlackForm) {
  auto p = make_sqrt_lasso(3, 15, 40, 3, 0.7);
  ASSERT_EQ(p.num_blocks(), 2u);
  Rng rng(0);
  Vec x(40);
  for (Index i = 0; i < 40; ++i) x[i] = rng.normal();
  Vec z(55);
  z << x, p.block(0).A.apply(x) - p.b();
  EXPECT_LE(p.residual(z).norm(), 1e-12);
  EXPECT_NEAR(p.objective(z), sqrt_lasso_compact(p, x), 1e-12);
  EXPECT_NEAR(p.block(0).f.weights[0], 0.7, 0);
}

TEST(Problems, SvmToy) {
  Mat W(4, 2);
  W << 1, 0, 2, 1, -1, 0, -2, -1;
  Vec lab = (Vec(4) << 1, 1, -1, -1).finished();
  auto p = make_svm_hinge(W, Vec::Zero(4), lab, SvmReg::L2, 0.1);
  EXPECT_EQ(p.num_blocks(), 2u);
  EXPECT_EQ(svm_accuracy(W, Vec::Zero(4), lab, (Vec(2) << 1, 0).finished()), 1.0);
  EXPECT_EQ(svm_accuracy(W, Vec::Zero(4), lab, (Vec(2) << -1, 0).finished()), 0.0);
  EXPECT_THROW(make_svm_hinge(W, Vec::Zero(3), lab, SvmReg::L1, 0.1), Error);
}

TEST(Problems, SlackReformulation) {
  auto p = make_group_bp(1, 8, 24, 6);
  p.reference = Reference{p.meta.planted, Vec::Zero(8), 1.0, "test"};
  auto q = slack_reformulation(p);
  ASSERT_EQ(q.num_blocks(), 2u);
  EXPECT_EQ(q.n(), 32);
  Vec x = p.meta.planted;
  Vec z(32);
  z << x, Vec::Zero(8);
  EXPECT_EQ(q.objective(z), p.objective(x));
  EXPECT_LE((q.residual(z) - p.residual(x)).norm(), 1e-12);
  EXPECT_TRUE(q.in_domain(z));
  EXPECT_EQ(q.reference->x, z);
  EXPECT_EQ(q.meta.family, "group_bp_slack");
  // Any x in the box has a slack r = b - Ax inside the slack box.
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    Vec xt(24);
    for (Index i = 0; i < 24; ++i)
      xt[i] = p.block(0).set.lower(i) + (p.block(0).set.upper(i) - p.block(0).set.lower(i)) * rng.uniform();
    EXPECT_TRUE(q.block(1).set.contains(p.b() - p.A().apply(xt), 1e-10));
  }
}

TEST(Problems, NnlsExample) {
  Mat E = Mat::Identity(2, 2);
  Vec u = nnls(E, (Vec(2) << 1, -2).finished());
  EXPECT_NEAR(u[0], 1.0, 1e-14);
  EXPECT_EQ(u[1], 0.0);
}

TEST(Problems, LpOneDimensional) {
  // min |x| s.t. 2x = 1: x* = 0.5, f* = 0.5, |y*| = 0.5.
  ConstrainedProblem p({Block{l1_fn(1, 1.0), FeasibleSet::all(), LinearMap::dense(Mat::Constant(1, 1, 2.0))}},
                       Vec::Ones(1));
  auto r = reference_solve_lp(p);
  EXPECT_NEAR(r.x[0], 0.5, 1e-12);
  EXPECT_NEAR(r.f_star, 0.5, 1e-12);
  EXPECT_NEAR(std::abs(r.y[0]), 0.5, 1e-12);
}

TEST(Problems, LpMatchesSelfSolve) {
  auto p = make_basis_pursuit(7, 5, 12, 2);
  auto lp = reference_solve_lp(p);
  auto l1 = reference_l1_self_solve(p);
  EXPECT_NEAR(lp.f_star, l1.f_star, 1e-8 * (1 + lp.f_star));
  EXPECT_LE((lp.x - l1.x).norm(), 1e-6);
}

TEST(Problems, ElasticNetKkt) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double sigma = 0.3;
    auto p = make_elastic_net(seed, 10, 30, 3, sigma);
    auto r = reference_elastic_net(p);
    EXPECT_LE(p.residual(r.x).norm(), 1e-9);
    Vec g = p.A().adjoint_apply(r.y);
    for (Index i = 0; i < 30; ++i) {
      if (std::abs(r.x[i]) > 1e-12)
        EXPECT_NEAR((r.x[i] > 0 ? 1.0 : -1.0) + sigma * r.x[i] + g[i], 0.0, 1e-8) << "seed " << seed;
      else
        EXPECT_LE(std::abs(g[i]), 1 + 1e-8) << "seed " << seed;
    }
    EXPECT_NEAR(r.f_star, p.objective(r.x), 1e-12 * (1 + r.f_star));
  }
}
