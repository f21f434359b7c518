// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "exgap/problem.hpp"

namespace exgap {

enum class InnerCriterion { ObjectiveGap, GradientMap };

struct InnerTolerance {
  double delta = 1e-8;
  InnerCriterion criterion = InnerCriterion::ObjectiveGap;
};

/// F(x) = sum_i f_i(x_i) + lin'(Ax) + (rho/2)||Ax - t||^2 over x_i in X_i.
/// The augmented Lagrangian, the H_beta model of prox_{Af} and the ADMM block
/// subproblems are all of this form (up to additive constants).
struct CompositeObjective {
  std::span<const Block> blocks;
  const LinearMap* A = nullptr;
  double norm_sq = 0.0;  // safety-scaled ||A||^2
  Vec lin;
  double rho = 1.0;
  Vec t;

  double lipschitz() const { return rho * norm_sq; }
};

struct InnerResult {
  Vec x;
  int iters = 0;
  double gap_bound = kInf;
  bool polished = false;
  std::string status = "ok";  // ok | inner-budget
};

class InnerBudgetError : public Error {
 public:
  explicit InnerBudgetError(InnerResult r)
      : Error("inner-budget", "inner solver hit its iteration cap", r.gap_bound), result(std::move(r)) {}
  InnerResult result;
};

namespace detail {

struct CompositeEval {
  const CompositeObjective& obj;
  std::vector<Index> off;

  explicit CompositeEval(const CompositeObjective& o) : obj(o) {
    off.push_back(0);
    for (const auto& b : o.blocks) off.push_back(off.back() + b.A.cols());
    require(off.back() == o.A->cols(), "shape", "composite blocks do not cover A");
  }

  Index nb() const { return Index(obj.blocks.size()); }
  auto seg(const Vec& x, Index i) const { return x.segment(off[i], off[i + 1] - off[i]); }

  double h(const Vec& x) const {
    double v = 0.0;
    for (Index i = 0; i < nb(); ++i) v += func_eval(obj.blocks[i].f, obj.blocks[i].set, seg(x, i));
    return v;
  }
  double smooth(const Vec& ax) const { return obj.lin.dot(ax) + 0.5 * obj.rho * (ax - obj.t).squaredNorm(); }
  Vec prox(const Vec& v, double lambda) const {
    Vec z(v.size());
    for (Index i = 0; i < nb(); ++i)
      z.segment(off[i], off[i + 1] - off[i]) = prox_eval(obj.blocks[i].f, obj.blocks[i].set, lambda, seg(v, i));
    return z;
  }
  Vec project(const Vec& v) const {
    Vec z(v.size());
    for (Index i = 0; i < nb(); ++i) z.segment(off[i], off[i + 1] - off[i]) = obj.blocks[i].set.project(seg(v, i));
    return z;
  }
  double conj(const Vec& s, const Vec& hint) const {
    double v = 0.0;
    for (Index i = 0; i < nb(); ++i) {
      Vec hi = seg(hint, i);
      v += conj_eval(obj.blocks[i].f, obj.blocks[i].set, seg(s, i), &hi);
      if (std::isinf(v)) return kInf;
    }
    return v;
  }

  // F(x) - D(lambda) with lambda the scaled gradient of the smooth part;
  // D(lambda) = -h*(-A'lambda) - phi*(lambda) is a lower bound on min F.
  // scale (optional) receives the magnitude of the summed terms, which sets
  // the rounding floor of the returned value.
  double gap(const Vec& x, const Vec& ax, double fx, double* scale = nullptr) const {
    Vec lam0 = obj.lin + obj.rho * (ax - obj.t);
    Vec s0 = -obj.A->adjoint_apply(lam0);
    double th = 1.0;
    double hc = conj(s0, x);
    if (!std::isfinite(hc)) {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (std::isfinite(conj(mid * s0, x))) lo = mid;
        else hi = mid;
      }
      th = lo;
      hc = conj(th * s0, x);
      if (!std::isfinite(hc)) return kInf;
    }
    Vec dl = th * lam0 - obj.lin;
    double phistar = dl.dot(obj.t) + dl.squaredNorm() / (2 * obj.rho);
    if (scale)
      *scale = std::abs(h(x)) + std::abs(obj.lin.dot(ax)) + 0.5 * obj.rho * (ax - obj.t).squaredNorm() + std::abs(hc) +
               std::abs(dl.dot(obj.t)) + dl.squaredNorm() / (2 * obj.rho);
    return std::max(0.0, fx + hc + phistar);
  }

  // Componentwise stationarity of a polished point, relative tolerance 1e-9
  // on the gradient of the smooth part. Used when rho amplifies rounding in
  // the gap evaluation beyond the gap floor.
  bool kkt_ok(const Vec& x, const Vec& ax) const {
    Vec g = obj.A->adjoint_apply(obj.lin + obj.rho * (ax - obj.t));
    const double tol = 1e-9 * std::max(1.0, g.cwiseAbs().maxCoeff());
    for (Index bi = 0; bi < nb(); ++bi) {
      const Block& blk = obj.blocks[bi];
      const FunctionSpec& f = blk.f;
      for (Index j = 0; j < off[bi + 1] - off[bi]; ++j) {
        Index i = off[bi] + j;
        if (f.kind == FuncKind::IndicatorZero) continue;
        double w = f.kind == FuncKind::L1 ? f.weights[j] : 0.0;
        double gi = g[i] + (f.quad_sigma > 0 ? f.quad_sigma * (x[i] - f.quad_center[j]) : 0.0);
        double lo = blk.set.lower(j), hi = blk.set.upper(j), xi = x[i];
        // -gi must lie in w*d|xi| + N_[lo,hi](xi)
        double slo = xi > 0 ? w : (xi < 0 ? -w : -w), shi = xi > 0 ? w : (xi < 0 ? -w : w);
        double need_lo = -gi - shi, need_hi = -gi - slo;  // normal-cone component range
        bool at_lo = xi <= lo, at_hi = xi >= hi;
        if (need_hi < -tol && !at_lo) return false;
        if (need_lo > tol && !at_hi) return false;
      }
    }
    return true;
  }

  // Active-set polish for L1/Zero/quadratic terms with boxes: fix the
  // coordinates sitting at a bound or at the L1 kink, solve the reduced
  // quadratic for the rest (closest solution to x when it is singular), keep
  // the result only if signs stay consistent.
  bool polish(const Vec& x, Vec& out) const {
    const Index n = x.size();
    std::vector<Index> free_idx;
    Vec fixed = Vec::Zero(n), lin_free = Vec::Zero(n), sig = Vec::Zero(n), cen = Vec::Zero(n);
    std::vector<int> sign(n, 0);
    for (Index bi = 0; bi < nb(); ++bi) {
      const Block& blk = obj.blocks[bi];
      const FunctionSpec& f = blk.f;
      if (f.kind != FuncKind::L1 && f.kind != FuncKind::Zero && f.kind != FuncKind::SquaredL2 &&
          f.kind != FuncKind::IndicatorZero)
        return false;
      for (Index j = 0; j < off[bi + 1] - off[bi]; ++j) {
        Index i = off[bi] + j;
        double lo = blk.set.lower(j), hi = blk.set.upper(j), xi = x[i];
        if (f.quad_sigma > 0) {
          sig[i] = f.quad_sigma;
          cen[i] = f.quad_center[j];
        }
        if (f.kind == FuncKind::IndicatorZero) {
          fixed[i] = 0.0;
          continue;
        }
        if (xi <= lo + 1e-14 * std::max(1.0, std::abs(lo))) {
          fixed[i] = lo;
          continue;
        }
        if (xi >= hi - 1e-14 * std::max(1.0, std::abs(hi))) {
          fixed[i] = hi;
          continue;
        }
        if (f.kind == FuncKind::L1 && f.weights[j] > 0) {
          if (xi == 0.0) {
            fixed[i] = 0.0;
            continue;
          }
          sign[i] = xi > 0 ? 1 : -1;
          lin_free[i] = f.weights[j] * sign[i];
        }
        free_idx.push_back(i);
      }
    }
    const Index nf = Index(free_idx.size());
    if (nf > 500) return false;
    Vec xn = fixed;
    if (nf > 0) {
      Mat a = obj.A->to_dense();
      Mat af(a.rows(), nf);
      for (Index j = 0; j < nf; ++j) af.col(j) = a.col(free_idx[j]);
      Vec rest = a * fixed;
      Mat h = obj.rho * af.transpose() * af;
      Vec rhs = obj.rho * af.transpose() * (obj.t - rest) - af.transpose() * obj.lin;
      for (Index j = 0; j < nf; ++j) {
        Index i = free_idx[j];
        h(j, j) += sig[i];
        rhs[j] += sig[i] * cen[i] - lin_free[i];
      }
      // reduced solution closest to the current iterate (h may be singular)
      Vec x0(nf);
      for (Index j = 0; j < nf; ++j) x0[j] = x[free_idx[j]];
      Vec res = rhs - h * x0;
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(h);
      Vec xf = x0 + cod.solve(res);
      if (!xf.allFinite() || (h * xf - rhs).norm() > 1e-10 * std::max(1.0, rhs.norm())) return false;
      for (Index j = 0; j < nf; ++j) {
        Index i = free_idx[j];
        if (sign[i] != 0 && xf[j] * sign[i] < 0) return false;
        xn[i] = xf[j];
      }
      xn = project(xn);
    }
    out = xn;
    return true;
  }
};

}  // namespace detail

/// Default inner budget 10*ceil(sqrt(L/(rho delta^2))), capped at 1e5.
inline int default_inner_budget(const CompositeObjective& obj, double delta) {
  double r = std::sqrt(obj.lipschitz() / (obj.rho * delta * delta));
  if (!std::isfinite(r)) return 100000;
  return int(std::min(1e5, 10.0 * std::ceil(std::max(1.0, r))));
}

/// Restarted FISTA with a duality-gap certificate. ObjectiveGap stops when the
/// gap is at most rho*delta^2/2 (floored at 1e-13 times the magnitude of the
/// terms summed in the gap, below which it is not resolvable in double precision). GradientMap stops when
/// L*||x_{k+1} - z_k|| <= delta.
inline InnerResult fista_solve(const CompositeObjective& obj, const Vec& x0, const InnerTolerance& tol,
                               int max_iter = -1) {
  require(obj.A && x0.size() == obj.A->cols(), "shape", "fista: x0 length");
  require(tol.delta > 0, "bad-delta", "inner tolerance must be positive");
  require(obj.rho > 0, "bad-rho", "quadratic weight must be positive");
  if (max_iter < 0) max_iter = default_inner_budget(obj, tol.delta);
  detail::CompositeEval ev(obj);
  const double target = 0.5 * obj.rho * tol.delta * tol.delta;
  const double L = obj.lipschitz();

  InnerResult best;
  auto consider = [&](const Vec& x, const Vec& ax, bool polished) {
    double fx = ev.h(x) + ev.smooth(ax);
    double scale = 0.0;
    double g = ev.gap(x, ax, fx, &scale);
    if (g < best.gap_bound || best.x.size() == 0) {
      best.x = x;
      best.gap_bound = g;
      best.polished = polished;
    }
    double floor = 1e-13 * std::max(1.0, scale);
    return g <= std::max(target, floor);
  };
  auto try_polish = [&](const Vec& x) {
    Vec xp;
    bool pok = ev.polish(x, xp);
    if (!pok) return false;
    Vec axp = obj.A->apply(xp);
    if (consider(xp, axp, true)) return true;
    if (!ev.kkt_ok(xp, axp)) return false;
    best.x = xp;
    best.polished = true;
    return true;
  };

  Vec x = ev.project(x0);
  Vec ax = obj.A->apply(x);
  bool done = consider(x, ax, false);
  if (!done && L == 0.0) {
    x = ev.prox(x, 1e12);
    ax = obj.A->apply(x);
    done = consider(x, ax, false);
  }
  if (!done && tol.criterion == InnerCriterion::ObjectiveGap) done = try_polish(x);
  Vec z = x, az = ax;
  double theta = 1.0;
  int it = 0;
  while (!done && it < max_iter && L > 0) {
    ++it;
    Vec g = obj.A->adjoint_apply(obj.lin + obj.rho * (az - obj.t));
    Vec xn = ev.prox(z - g / L, 1.0 / L);
    Vec axn = obj.A->apply(xn);
    if (tol.criterion == InnerCriterion::GradientMap) {
      done = L * (xn - z).norm() <= tol.delta;
      consider(xn, axn, false);
      best.x = xn;
    } else {
      done = consider(xn, axn, false);
    }
    if ((z - xn).dot(xn - x) > 0) {  // gradient restart
      theta = 1.0;
      z = xn;
      az = axn;
    } else {
      double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      double mom = (theta - 1.0) / tn;
      z = xn + mom * (xn - x);
      az = axn + mom * (axn - ax);
      theta = tn;
    }
    x = std::move(xn);
    ax = std::move(axn);
    if (!done && tol.criterion == InnerCriterion::ObjectiveGap && it % 25 == 0) done = try_polish(x);
  }
  best.iters = it;
  if (!done) {
    best.status = "inner-budget";
    throw InnerBudgetError(best);
  }
  return best;
}

/// delta-argmin of the augmented Lagrangian f(x) + y'(Ax-b) + (gamma/2)||Ax-b||^2.
inline InnerResult aug_lagrangian_argmin(const ConstrainedProblem& p, const Vec& y, double gamma,
                                         const InnerTolerance& tol, const Vec& warm, int max_iter = -1) {
  require(gamma > 0, "bad-gamma", "gamma must be positive");
  require(p.sense() == ConstraintSense::Equality, "sense", "augmented Lagrangian smoother needs equalities");
  CompositeObjective obj{p.blocks(), &p.A(), p.norm_sq(), y, gamma, p.b()};
  return fista_solve(obj, warm.size() ? warm : Vec(Vec::Zero(p.n())), tol, max_iter);
}

/// delta-argmin of H(x) = f(x) + yh'A(x - xh) + (Lbar/(2 beta))||A(x - xh)||^2.
inline InnerResult inexact_prox_Af(const ConstrainedProblem& p, const Vec& xh, const Vec& yh, double beta,
                                   double lbar, const InnerTolerance& tol, const Vec& warm, int max_iter = -1) {
  require(beta > 0, "bad-beta", "beta must be positive");
  CompositeObjective obj{p.blocks(), &p.A(), p.norm_sq(), yh, lbar / beta, p.A().apply(xh)};
  return fista_solve(obj, warm.size() ? warm : xh, tol, max_iter);
}

}  // namespace exgap
