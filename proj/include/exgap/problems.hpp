// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "exgap/problem.hpp"
#include "exgap/subsolver.hpp"

namespace exgap {

/// Counter-based generator: draw i of stream `seed` is splitmix64's output
/// function applied to seed*0x9E3779B97F4A7C15 + (i+1)*0xBF58476D1CE4E5B9.
/// Finalizer constants 0xBF58476D1CE4E5B9, 0x94D049BB133111EB; shifts 30, 27, 31.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed * 0x9E3779B97F4A7C15ULL) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * 0xBF58476D1CE4E5B9ULL); }
  std::uint64_t counter() const { return ctr_; }

  /// Uniform in (0, 1): 53 random bits, offset by half an ulp.
  double uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Box-Muller; the sine variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return std::uint64_t(uniform() * double(n)) % n; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Mat gaussian_matrix(Rng& rng, Index m, Index n) {
  Mat a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

/// First k entries of a Fisher-Yates shuffle of 0..n-1.
inline std::vector<Index> random_subset(Rng& rng, Index n, Index k) {
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index(0));
  for (Index i = 0; i < k; ++i) std::swap(idx[i], idx[i + Index(rng.below(std::uint64_t(n - i)))]);
  idx.resize(k);
  return idx;
}

/// Inverse standard normal CDF: Acklam's rational approximation (relative
/// error below 1.2e-9) followed by one Halley step on erfc.
inline double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("bad-probability", "norm_ppf needs 0 < p < 1", p);
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1 + 0.5 * x * u);
}

struct DataOptions {
  double correlation = 0.0;  // column mixing A <- (1-rho)A + rho a0 1'
  double noise = 0.0;        // b += noise * ||A x||/sqrt(m) * N(0,1)
};

namespace detail {

inline void apply_correlation(Mat& a, double rho) {
  if (rho == 0.0) return;
  Vec a0 = a.col(0);
  for (Index j = 0; j < a.cols(); ++j) {
    a.col(j) = (1 - rho) * a.col(j) + rho * a0;
    double nj = a.col(j).norm();
    if (nj > 0) a.col(j) /= nj;
  }
}

inline Vec planted_rhs(Rng& rng, const Mat& a, const Vec& x, double noise) {
  Vec b = a * x;
  if (noise > 0) {
    double scale = noise * b.norm() / std::sqrt(double(b.size()));
    for (Index i = 0; i < b.size(); ++i) b[i] += scale * rng.normal();
  }
  return b;
}

inline Vec sparse_vector(Rng& rng, Index n, Index s) {
  Vec x = Vec::Zero(n);
  for (Index i : random_subset(rng, n, s)) x[i] = rng.normal();
  return x;
}

}  // namespace detail

/// min ||x||_1 s.t. Ax = b with Gaussian A and b = A x_nat, x_nat s-sparse.
inline ConstrainedProblem make_basis_pursuit(std::uint64_t seed, Index m, Index n, Index s, DataOptions opt = {}) {
  require(s <= n && m < n && s >= 0, "bad-dims", "basis pursuit needs s <= n and m < n");
  Rng rng(seed);
  Mat a = gaussian_matrix(rng, m, n);
  detail::apply_correlation(a, opt.correlation);
  Vec x = detail::sparse_vector(rng, n, s);
  Vec b = detail::planted_rhs(rng, a, x, opt.noise);
  ConstrainedProblem p({Block{l1_fn(n, 1.0), FeasibleSet::all(), LinearMap::dense(a)}}, b);
  p.meta = {"basis_pursuit", seed, s, opt.noise, "correlation=" + std::to_string(opt.correlation)};
  p.meta.planted = x;
  return p;
}

/// Random partition of 0..n-1 into n_g groups of near-equal size.
inline std::vector<int> random_groups(Rng& rng, Index n, Index n_g) {
  std::vector<Index> perm = random_subset(rng, n, n);
  std::vector<int> group_of(n);
  Index base = n / n_g, extra = n % n_g, pos = 0;
  for (Index g = 0; g < n_g; ++g) {
    Index sz = base + (g < extra ? 1 : 0);
    for (Index t = 0; t < sz; ++t) group_of[perm[pos++]] = int(g);
  }
  return group_of;
}

enum class GroupBox { None, Tight };

/// min sum_g ||x_g||_2 s.t. Ax = b, x in [min x_nat, max x_nat] (GroupBox::Tight).
/// x_nat has max(1, n_g/8) active groups; weights are 1.
inline ConstrainedProblem make_group_bp(std::uint64_t seed, Index m, Index n, Index n_g, GroupBox box = GroupBox::Tight,
                                        DataOptions opt = {}) {
  require(n_g >= 1 && n_g <= n && m < n, "bad-dims", "group basis pursuit dimensions");
  Rng rng(seed);
  Mat a = gaussian_matrix(rng, m, n);
  detail::apply_correlation(a, opt.correlation);
  std::vector<int> groups = random_groups(rng, n, n_g);
  Index active = std::max<Index>(1, n_g / 8);
  std::vector<Index> act = random_subset(rng, n_g, active);
  Vec x = Vec::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (std::find(act.begin(), act.end(), Index(groups[i])) != act.end()) x[i] = rng.normal();
  Vec b = detail::planted_rhs(rng, a, x, opt.noise);
  FeasibleSet set = FeasibleSet::all();
  if (box == GroupBox::Tight) set = FeasibleSet::box(Vec::Constant(n, x.minCoeff()), Vec::Constant(n, x.maxCoeff()));
  ConstrainedProblem p({Block{group_l2_fn(groups, Vec::Ones(n_g)), set, LinearMap::dense(a)}}, b);
  p.meta = {"group_bp", seed, active, opt.noise, ""};
  p.meta.planted = x;
  return p;
}

/// min ||x||_1 + (sigma/2)||x||^2 s.t. Ax = b.
inline ConstrainedProblem make_elastic_net(std::uint64_t seed, Index m, Index n, Index s, double sigma,
                                           DataOptions opt = {}) {
  require(sigma >= 0, "bad-sigma", "sigma must be nonnegative");
  ConstrainedProblem bp = make_basis_pursuit(seed, m, n, s, opt);
  if (sigma == 0.0) return bp;
  Block blk = bp.block(0);
  blk.f = strongly_convexify(blk.f, sigma, Vec::Zero(n));
  ConstrainedProblem p({blk}, bp.b());
  p.meta = bp.meta;
  p.meta.family = "elastic_net";
  return p;
}

/// lambda = c * Phi^{-1}(1 - alpha/(2n)).
inline double sqrt_lasso_lambda(Index n, double c = 1.1, double alpha = 0.05) {
  return c * norm_ppf(1.0 - 0.5 * alpha / double(n));
}

/// min lambda ||x||_1 + ||r||_2 s.t. Ax - r = b (slack form of the
/// square-root LASSO min lambda||x||_1 + ||Ax - b||_2).
inline ConstrainedProblem make_sqrt_lasso(std::uint64_t seed, Index m, Index n, Index s,
                                          std::optional<double> lambda = std::nullopt, DataOptions opt = {}) {
  Rng rng(seed);
  Mat a = gaussian_matrix(rng, m, n);
  detail::apply_correlation(a, opt.correlation);
  Vec x = detail::sparse_vector(rng, n, s);
  Vec b = detail::planted_rhs(rng, a, x, opt.noise);
  double lam = lambda.value_or(sqrt_lasso_lambda(n));
  std::vector<Block> blocks{Block{l1_fn(n, lam), FeasibleSet::all(), LinearMap::dense(a)},
                            Block{l2_norm_fn(1.0), FeasibleSet::all(), LinearMap::dense(-Mat::Identity(m, m))}};
  ConstrainedProblem p(std::move(blocks), b);
  p.meta = {"sqrt_lasso", seed, s, opt.noise, "lambda=" + std::to_string(lam)};
  p.meta.planted = x;
  return p;
}

/// lambda ||x||_1 + ||Ax - b||_2 (compact form).
inline double sqrt_lasso_compact(const ConstrainedProblem& p, const Vec& x) {
  const Block& b0 = p.block(0);
  return func_eval(b0.f, b0.set, x) + (b0.A.apply(x) - p.b()).norm();
}

enum class SvmReg { L2, L1 };

/// min sum_j max(0, 1 - y_j r_j) + g(x) s.t. Wx - r = b.
inline ConstrainedProblem make_svm_hinge(const Mat& W, const Vec& b, const Vec& labels, SvmReg reg, double lambda) {
  require(W.rows() == b.size() && W.rows() == labels.size(), "shape", "svm data shapes");
  require(lambda > 0, "bad-lambda", "regularization weight must be positive");
  Index n = W.cols(), N = W.rows();
  FunctionSpec g = reg == SvmReg::L2 ? squared_l2_fn(lambda, Vec::Zero(n)) : l1_fn(n, lambda);
  std::vector<Block> blocks{Block{g, FeasibleSet::all(), LinearMap::dense(W)},
                            Block{hinge_sum_fn(labels), FeasibleSet::all(), LinearMap::dense(-Mat::Identity(N, N))}};
  ConstrainedProblem p(std::move(blocks), b);
  p.meta.family = "svm_hinge";
  return p;
}

/// Fraction of samples with y_j (Wx - b)_j > 0.
inline double svm_accuracy(const Mat& W, const Vec& b, const Vec& labels, const Vec& x) {
  Vec r = W * x - b;
  Index ok = 0;
  for (Index j = 0; j < r.size(); ++j) ok += labels[j] * r[j] > 0 ? 1 : 0;
  return double(ok) / double(r.size());
}

/// Two-block slack form of a single-block problem:
/// min f(x) + indicator_{0}(r) s.t. Ax + r = b, r in [b - max Ax, b - min Ax]
/// (interval bounds of Ax over the box of x).
inline ConstrainedProblem slack_reformulation(const ConstrainedProblem& p) {
  require(p.num_blocks() == 1, "shape", "slack reformulation takes a single-block problem");
  const Block& blk = p.block(0);
  Mat a = blk.A.to_dense();
  Index m = p.m();
  Vec lo(m), hi(m);
  for (Index j = 0; j < m; ++j) {
    double l = 0, u = 0;
    for (Index i = 0; i < a.cols(); ++i) {
      double v = a(j, i), xl = blk.set.lower(i), xu = blk.set.upper(i);
      if (v == 0.0) continue;
      l += std::min(v * xl, v * xu);
      u += std::max(v * xl, v * xu);
    }
    lo[j] = p.b()[j] - u;
    hi[j] = p.b()[j] - l;
  }
  FeasibleSet rset = (lo.allFinite() && hi.allFinite()) ? FeasibleSet::box(lo, hi) : FeasibleSet::all();
  std::vector<Block> blocks{blk, Block{indicator_zero_fn(), rset, LinearMap::dense(Mat::Identity(m, m))}};
  ConstrainedProblem q(std::move(blocks), p.b());
  q.meta = p.meta;
  q.meta.family = p.meta.family + "_slack";
  if (p.reference) {
    Reference r = *p.reference;
    Vec x(q.n());
    x << r.x, Vec::Zero(m);
    r.x = x;
    q.reference = r;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Reference oracles

/// Lawson-Hanson NNLS: min ||E u - f|| s.t. u >= 0.
inline Vec nnls(const Mat& E, const Vec& f, int max_iter = -1) {
  const Index n = E.cols();
  if (max_iter < 0) max_iter = int(30 * n + 100);
  Vec u = Vec::Zero(n);
  std::vector<bool> P(n, false);
  const double tol = 1e-13 * std::max(1.0, E.cwiseAbs().maxCoeff()) * std::max(1.0, f.norm());
  auto solve_passive = [&](Vec& z) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j)
      if (P[j]) idx.push_back(j);
    Mat Ep(E.rows(), Index(idx.size()));
    for (std::size_t t = 0; t < idx.size(); ++t) Ep.col(Index(t)) = E.col(idx[t]);
    Vec zp = Ep.colPivHouseholderQr().solve(f);
    z = Vec::Zero(n);
    for (std::size_t t = 0; t < idx.size(); ++t) z[idx[t]] = zp[Index(t)];
  };
  for (int it = 0; it < max_iter; ++it) {
    Vec w = E.transpose() * (f - E * u);
    Index jmax = -1;
    double wmax = tol;
    for (Index j = 0; j < n; ++j)
      if (!P[j] && w[j] > wmax) {
        wmax = w[j];
        jmax = j;
      }
    if (jmax < 0) break;
    P[jmax] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      Vec z;
      solve_passive(z);
      bool feasible = true;
      for (Index j = 0; j < n; ++j)
        if (P[j] && z[j] <= 0) feasible = false;
      if (feasible) {
        u = z;
        break;
      }
      double alpha = 1.0;
      for (Index j = 0; j < n; ++j)
        if (P[j] && z[j] <= 0) alpha = std::min(alpha, u[j] / (u[j] - z[j]));
      u += alpha * (z - u);
      for (Index j = 0; j < n; ++j)
        if (P[j] && u[j] <= 1e-15) {
          P[j] = false;
          u[j] = 0.0;
        }
    }
  }
  return u;
}

/// Least-distance program min ||y|| s.t. G y >= h, through NNLS.
inline Vec ldp(const Mat& G, const Vec& h) {
  const Index k = G.rows(), p = G.cols();
  if (k == 0) return Vec::Zero(p);
  Mat E(p + 1, k);
  E.topRows(p) = G.transpose();
  E.row(p) = h.transpose();
  Vec f = Vec::Zero(p + 1);
  f[p] = 1.0;
  Vec u = nnls(E, f);
  Vec r = E * u - f;
  if (std::abs(r[p]) < 1e-14) throw Error("ldp-infeasible", "least-distance program has no feasible point");
  return -r.head(p) / r[p];
}

/// min ||y|| s.t. E y = e, G y >= h: nullspace elimination then LDP.
inline Vec min_norm_polyhedral(const Mat& Eq, const Vec& e, const Mat& G, const Vec& h) {
  const Index p = std::max(Eq.cols(), G.cols());
  Vec y0 = Vec::Zero(p);
  Mat N = Mat::Identity(p, p);
  if (Eq.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Eq);
    y0 = cod.solve(e);
    Eigen::JacobiSVD<Mat> svd(Eq, Eigen::ComputeFullV);
    Index r = cod.rank();
    N = svd.matrixV().rightCols(p - r);
  }
  if (G.rows() == 0 || N.cols() == 0) return y0;
  Vec z = ldp(G * N, h - G * y0);
  return y0 + N * z;
}

/// Dual multipliers with A'y in -df(x*) of smallest norm, for a single block
/// f = sum_i w_i|x_i| + (s/2)||x - c||^2 over X = R^n (polyhedral face).
inline Vec min_norm_dual_l1(const ConstrainedProblem& p, const Vec& xs, double zero_tol = 1e-9) {
  require(p.num_blocks() == 1 && p.block(0).f.kind == FuncKind::L1 && p.block(0).set.kind == SetKind::All,
          "oracle-kind", "min_norm_dual_l1 needs one unconstrained weighted-L1 block");
  const Block& blk = p.block(0);
  Mat a = blk.A.to_dense();
  const Index n = a.cols(), m = a.rows();
  const auto& f = blk.f;
  std::vector<Index> on, off;
  for (Index i = 0; i < n; ++i) (std::abs(xs[i]) > zero_tol ? on : off).push_back(i);
  // smooth part gradient s(x - c)
  Vec grad = Vec::Zero(n);
  if (f.quad_sigma > 0) grad = f.quad_sigma * (xs - f.quad_center);
  Mat Eq(Index(on.size()), m), G(2 * Index(off.size()), m);
  Vec e(Index(on.size())), h(2 * Index(off.size()));
  for (std::size_t t = 0; t < on.size(); ++t) {
    Index i = on[t];
    Eq.row(Index(t)) = a.col(i).transpose();
    e[Index(t)] = -(f.weights[i] * (xs[i] > 0 ? 1.0 : -1.0) + grad[i]);
  }
  for (std::size_t t = 0; t < off.size(); ++t) {
    Index i = off[t];
    // -w - g <= -(A'y)_i <= w - g
    G.row(2 * Index(t)) = a.col(i).transpose();
    h[2 * Index(t)] = -f.weights[i] - grad[i];
    G.row(2 * Index(t) + 1) = -a.col(i).transpose();
    h[2 * Index(t) + 1] = -f.weights[i] + grad[i];
  }
  return min_norm_polyhedral(Eq, e, G, h);
}

/// Basis pursuit by vertex enumeration of the standard form
/// min w'(u+v) s.t. [A -A][u;v] = b, u, v >= 0 (n <= 12). y* is the
/// minimum-norm multiplier on the optimal face.
inline Reference reference_solve_lp(const ConstrainedProblem& p) {
  require(p.num_blocks() == 1 && p.block(0).f.kind == FuncKind::L1 && p.block(0).f.quad_sigma == 0 &&
              p.block(0).set.kind == SetKind::All,
          "oracle-kind", "LP oracle needs an unconstrained weighted-L1 problem");
  const Index n = p.n(), m = p.m();
  if (n > 12) throw Error("oracle-size", "LP oracle handles n <= 12");
  Mat a = p.block(0).A.to_dense();
  const Vec& w = p.block(0).f.weights;
  Mat S(m, 2 * n);
  S << a, -a;
  Vec cost(2 * n);
  cost << w, w;
  double best = kInf;
  Vec best_x;
  std::vector<int> pick(2 * n, 0);
  std::fill(pick.begin(), pick.begin() + m, 1);
  std::sort(pick.begin(), pick.end());
  do {
    std::vector<Index> cols;
    for (Index j = 0; j < 2 * n; ++j)
      if (pick[j]) cols.push_back(j);
    Mat B(m, m);
    for (Index t = 0; t < m; ++t) B.col(t) = S.col(cols[t]);
    Eigen::FullPivLU<Mat> lu(B);
    if (lu.rank() < m) continue;
    Vec xb = lu.solve(p.b());
    if ((B * xb - p.b()).norm() > 1e-9 * std::max(1.0, p.b().norm())) continue;
    if (xb.minCoeff() < -1e-10) continue;
    double c = 0;
    Vec x = Vec::Zero(n);
    for (Index t = 0; t < m; ++t) {
      double v = std::max(0.0, xb[t]);
      c += cost[cols[t]] * v;
      Index j = cols[t];
      x[j % n] += j < n ? v : -v;
    }
    if (c < best) {
      best = c;
      best_x = x;
    }
  } while (std::next_permutation(pick.begin(), pick.end()));
  if (!std::isfinite(best)) throw Error("oracle-infeasible", "no feasible vertex");
  Reference r;
  r.x = best_x;
  r.f_star = p.objective(best_x);
  r.y = min_norm_dual_l1(p, best_x);
  r.provenance = "lp-vertex-enumeration";
  return r;
}

/// Equality-constrained elastic net (weighted L1 plus a quadratic, X = R^n):
/// semismooth Newton on the dual, then the KKT linear system on the
/// identified support. y* is the minimum-norm multiplier.
inline Reference reference_elastic_net(const ConstrainedProblem& p, int max_iter = 200) {
  require(p.num_blocks() == 1 && p.block(0).f.kind == FuncKind::L1 && p.block(0).f.quad_sigma > 0 &&
              p.block(0).set.kind == SetKind::All,
          "oracle-kind", "elastic net oracle needs one unconstrained L1 + quadratic block");
  const Block& blk = p.block(0);
  Mat a = blk.A.to_dense();
  const Vec& w = blk.f.weights;
  const double s = blk.f.quad_sigma;
  const Vec& c = blk.f.quad_center;
  const Index n = a.cols(), m = a.rows();
  auto x_of = [&](const Vec& y) {
    Vec v = c - a.transpose() * y / s;
    Vec x(n);
    for (Index i = 0; i < n; ++i) x[i] = detail::soft(v[i], w[i] / s);
    return x;
  };
  // concave dual phi(y) = f(x(y)) + y'(A x(y) - b), gradient A x(y) - b
  auto phi = [&](const Vec& y, const Vec& x) { return p.objective(x) + y.dot(a * x - p.b()); };
  Vec y = Vec::Zero(m);
  Vec x = x_of(y);
  for (int it = 0; it < max_iter; ++it) {
    Vec g = a * x - p.b();
    if (g.norm() <= 1e-14 * std::max(1.0, p.b().norm())) break;
    Mat H = Mat::Zero(m, m);
    for (Index i = 0; i < n; ++i)
      if (x[i] != 0.0) H += a.col(i) * a.col(i).transpose() / s;
    H += 1e-12 * std::max(1.0, H.diagonal().maxCoeff()) * Mat::Identity(m, m);
    Vec d = H.ldlt().solve(g);  // ascent direction: phi'' = -H
    double t = 1.0, f0 = phi(y, x), slope = g.dot(d);
    for (int ls = 0; ls < 60; ++ls) {
      Vec yn = y + t * d;
      Vec xn = x_of(yn);
      if (phi(yn, xn) >= f0 + 1e-4 * t * slope) {
        y = yn;
        x = xn;
        break;
      }
      t *= 0.5;
    }
  }
  // KKT refinement: for a support S, A_S x_S = b with
  // x_S = c_S - (A_S'y + w sign)/s fixes y; x(y) is then the exact primal
  // point for that y. Entries at rounding level make the Newton support too
  // large when the true one has fewer than m elements, so thresholded
  // supports are tried as well and the x(y) with the smallest residual wins.
  const double xmax = x.cwiseAbs().maxCoeff();
  double best_res = (a * x - p.b()).norm();
  const Vec x_newton = x;
  for (double thr : {0.0, 1e-12, 1e-10, 1e-8, 1e-6}) {
    std::vector<Index> S;
    for (Index i = 0; i < n; ++i)
      if (std::abs(x_newton[i]) > thr * xmax) S.push_back(i);
    if (S.empty()) continue;
    Mat As(m, Index(S.size()));
    Vec rhs = -p.b() * s;
    for (std::size_t t = 0; t < S.size(); ++t) {
      Index i = S[t];
      As.col(Index(t)) = a.col(i);
      rhs += a.col(i) * (s * c[i] - w[i] * (x_newton[i] > 0 ? 1.0 : -1.0));
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(As * As.transpose());
    Vec xk = x_of(cod.solve(rhs));
    double res = (a * xk - p.b()).norm();
    if (res < best_res) {
      best_res = res;
      x = xk;
    }
  }
  // degenerate support entries come back at rounding level
  const double floor = 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
  for (Index i = 0; i < n; ++i)
    if (std::abs(x[i]) <= floor) x[i] = 0.0;
  Reference r;
  r.x = x;
  r.f_star = p.objective(x);
  r.y = min_norm_dual_l1(p, x);
  r.provenance = "elastic-net-kkt";
  return r;
}

/// Method of multipliers x+ = argmin L_rho(x, y), y+ = y + rho (Ax - b) with
/// inner solves at tolerance delta. Returns the last pair.
inline Reference reference_self_solve(const ConstrainedProblem& p, double rho = 1.0, double delta = 1e-10,
                                      int max_outer = 400, double feas_tol = 1e-12) {
  require(p.sense() == ConstraintSense::Equality, "sense", "self-solve needs equality constraints");
  Vec y = Vec::Zero(p.m());
  Vec x = p.project(Vec::Zero(p.n()));
  InnerTolerance tol{delta, InnerCriterion::ObjectiveGap};
  for (int it = 0; it < max_outer; ++it) {
    InnerResult res;
    try {
      res = aug_lagrangian_argmin(p, y, rho, tol, x, 200000);
    } catch (const InnerBudgetError& e) {
      res = e.result;
    }
    Vec xn = res.x;
    Vec r = p.residual(xn);
    y += rho * r;
    double dx = (xn - x).norm();
    x = xn;
    if (r.norm() <= feas_tol * std::max(1.0, p.b().norm()) && dx <= 1e-11 * std::max(1.0, x.norm())) break;
  }
  Reference ref;
  ref.x = x;
  ref.y = y;
  ref.f_star = p.objective(x);
  ref.provenance = "method-of-multipliers";
  return ref;
}

/// Self-solve for unconstrained weighted-L1 problems followed by an exact
/// support solve and the minimum-norm multiplier.
inline Reference reference_l1_self_solve(const ConstrainedProblem& p, double delta = 1e-10) {
  Reference r = reference_self_solve(p, 1.0, delta);
  const Block& blk = p.block(0);
  if (blk.f.kind == FuncKind::L1 && blk.f.quad_sigma == 0 && blk.set.kind == SetKind::All) {
    Mat a = blk.A.to_dense();
    std::vector<Index> S;
    for (Index i = 0; i < p.n(); ++i)
      if (std::abs(r.x[i]) > 1e-8) S.push_back(i);
    Mat As(p.m(), Index(S.size()));
    for (std::size_t t = 0; t < S.size(); ++t) As.col(Index(t)) = a.col(S[t]);
    Vec xs = As.colPivHouseholderQr().solve(p.b());
    Vec x = Vec::Zero(p.n());
    bool ok = (As * xs - p.b()).norm() <= 1e-10 * std::max(1.0, p.b().norm());
    for (std::size_t t = 0; t < S.size(); ++t) {
      x[S[t]] = xs[Index(t)];
      if (xs[Index(t)] * r.x[S[t]] <= 0) ok = false;
    }
    if (ok) {
      r.x = x;
      r.f_star = p.objective(x);
    }
    r.y = min_norm_dual_l1(p, r.x);
    r.provenance = "method-of-multipliers+support";
  }
  return r;
}

}  // namespace exgap
