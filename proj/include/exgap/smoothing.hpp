// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>

#include "exgap/problem.hpp"
#include "exgap/subsolver.hpp"

namespace exgap {

enum class SmootherKind { Bregman, AugLag };
enum class SChoice { Identity, OperatorA };

/// Smoother data: d_b is Euclidean (sigma_d = 1); S_xc caches S*x_c.
struct SmootherConfig {
  SmootherKind kind = SmootherKind::Bregman;
  SChoice S = SChoice::Identity;
  Vec xc;
  Vec S_xc;
  double L_bar = 1.0;
};

inline const char* to_string(SmootherKind k) { return k == SmootherKind::Bregman ? "bregman" : "auglag"; }

inline void validate_smoother(const ConstrainedProblem& p, const SmootherConfig& c) {
  require(c.xc.size() == p.n(), "shape", "center length");
  if (!p.in_domain(c.xc)) throw Error("bad-center", "prox center lies outside X");
  if (c.kind == SmootherKind::AugLag) {
    require(c.S == SChoice::OperatorA && c.L_bar == 1.0, "bad-smoother", "augmented Lagrangian needs S = A, Lbar = 1");
  } else {
    require(c.S == SChoice::Identity, "bad-smoother", "Bregman smoother needs S = I");
    require(c.L_bar >= p.norm_sq() / kNormSafety, "bad-smoother", "Lbar below ||A||^2");
  }
}

/// Bregman smoother with Lbar = safety-scaled ||A||^2; the default center is
/// the projection of 0 onto X.
inline SmootherConfig bregman_smoother(const ConstrainedProblem& p, std::optional<Vec> xc = std::nullopt) {
  SmootherConfig c;
  c.kind = SmootherKind::Bregman;
  c.S = SChoice::Identity;
  c.xc = xc ? *xc : p.project(Vec::Zero(p.n()));
  c.S_xc = c.xc;
  c.L_bar = p.norm_sq();
  validate_smoother(p, c);
  return c;
}

/// Augmented-Lagrangian smoother; the default center is the minimum-norm
/// solution of Ax = b, so d_b(Ax, Ax_c) = ||Ax - b||^2/2.
inline SmootherConfig auglag_smoother(const ConstrainedProblem& p, std::optional<Vec> xc = std::nullopt) {
  SmootherConfig c;
  c.kind = SmootherKind::AugLag;
  c.S = SChoice::OperatorA;
  if (xc) {
    c.xc = *xc;
  } else {
    Mat a = p.A().to_dense();
    c.xc = a.completeOrthogonalDecomposition().solve(p.b());
  }
  c.S_xc = p.A().apply(c.xc);
  c.L_bar = 1.0;
  validate_smoother(p, c);
  return c;
}

/// d_b(Sx, Sx_c); ax is Ax (only read when S = A).
inline double prox_distance(const SmootherConfig& c, const Vec& x, const Vec& ax) {
  if (c.S == SChoice::Identity) return 0.5 * (x - c.xc).squaredNorm();
  return 0.5 * (ax - c.S_xc).squaredNorm();
}

/// x*_gamma(y) for the Bregman smoother given aty = A'y:
/// prox over X of f/gamma at x_c - aty/gamma, block by block.
inline Vec bregman_argmin_aty(const ConstrainedProblem& p, const SmootherConfig& c, const Vec& aty, double gamma) {
  require(c.kind == SmootherKind::Bregman, "bad-smoother", "bregman_argmin needs the Bregman smoother");
  require(gamma > 0, "bad-gamma", "gamma must be positive");
  return p.prox(1.0 / gamma, c.xc - aty / gamma);
}

inline Vec bregman_argmin(const ConstrainedProblem& p, const SmootherConfig& c, const Vec& y, double gamma) {
  return bregman_argmin_aty(p, c, p.A().adjoint_apply(y), gamma);
}

inline Vec dual_center(const Vec& residual, double beta) {
  if (!(beta > 0)) throw Error("bad-beta", "beta must be positive", beta);
  return residual / beta;
}

/// f(x) + y'(Ax - b) + gamma d_b(Sx, Sx_c) at a given argmin x with ax = Ax.
inline double smoothed_dual_value_at(const ConstrainedProblem& p, const SmootherConfig& c, const Vec& y, double gamma,
                                     const Vec& x, const Vec& ax) {
  return p.objective(x) + y.dot(ax - p.b()) + gamma * prox_distance(c, x, ax);
}

/// Smoothed argmin for either smoother. The augmented-Lagrangian case goes
/// through the inner solver at tolerance delta.
inline Vec smoothed_argmin(const ConstrainedProblem& p, const SmootherConfig& c, const Vec& y, double gamma,
                           double delta = 1e-10, const Vec& warm = Vec()) {
  if (c.kind == SmootherKind::Bregman) return bregman_argmin(p, c, y, gamma);
  InnerTolerance tol{delta, InnerCriterion::ObjectiveGap};
  return aug_lagrangian_argmin(p, y, gamma, tol, warm.size() ? warm : c.xc).x;
}

inline double smoothed_dual_value(const ConstrainedProblem& p, const SmootherConfig& c, const Vec& y, double gamma) {
  Vec x = smoothed_argmin(p, c, y, gamma);
  return smoothed_dual_value_at(p, c, y, gamma, x, p.A().apply(x));
}

/// G = f(xbar) - g_gamma(ybar) + ||[A xbar - b]||^2/(2 beta), with the
/// positive part taken for inequality constraints.
inline double smoothed_gap(const ConstrainedProblem& p, const SmootherConfig& c, const Vec& xbar, const Vec& ybar,
                           double gamma, double beta) {
  if (!p.in_domain(xbar)) throw Error("infeasible-iterate", "xbar lies outside X");
  require(beta > 0, "bad-beta", "beta must be positive");
  double r = feasibility(p.sense(), p.residual(xbar));
  return p.objective(xbar) - smoothed_dual_value(p, c, ybar, gamma) + r * r / (2.0 * beta);
}

enum class Provenance { Analytic, Reference, Unavailable };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Analytic: return "analytic";
    case Provenance::Reference: return "reference";
    case Provenance::Unavailable: return "unavailable";
  }
  return "?";
}

struct DiameterEstimates {
  double D_X_S = kInf;
  double D_Y_star = std::numeric_limits<double>::quiet_NaN();
  Provenance dx_provenance = Provenance::Unavailable;
  Provenance dy_provenance = Provenance::Unavailable;
};

/// Coordinatewise max over the box of |(Ax - b)_j|, by interval arithmetic
/// over the given blocks. +inf if an unbounded coordinate meets a nonzero
/// column entry.
inline Vec residual_interval_bound(const ConstrainedProblem& p, const std::vector<std::size_t>& which, const Vec& b) {
  Vec lo = -b, hi = -b;
  for (std::size_t bi : which) {
    const Block& blk = p.block(bi);
    Mat a = blk.A.to_dense();
    for (Index i = 0; i < a.cols(); ++i) {
      double l = blk.set.lower(i), u = blk.set.upper(i);
      for (Index j = 0; j < a.rows(); ++j) {
        double v = a(j, i);
        if (v == 0.0) continue;
        lo[j] += std::min(v * l, v * u);
        hi[j] += std::max(v * l, v * u);
      }
    }
  }
  return lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
}

/// D_X^S for the configured smoother plus D_Y* from the problem reference.
inline DiameterEstimates estimate_diameters(const ConstrainedProblem& p, const SmootherConfig& c) {
  DiameterEstimates d;
  if (c.S == SChoice::Identity) {
    double s = 0.0;
    for (std::size_t bi = 0; bi < p.num_blocks(); ++bi) {
      const Block& blk = p.block(bi);
      if (!blk.set.bounded()) throw Error("unbounded-domain", "Bregman smoother needs a bounded box");
      auto xc = p.slice(c.xc, bi);
      for (Index i = 0; i < xc.size(); ++i) {
        double dl = blk.set.lower(i) - xc[i], du = blk.set.upper(i) - xc[i];
        s += 0.5 * std::max(dl * dl, du * du);
      }
    }
    d.D_X_S = s;
    d.dx_provenance = Provenance::Analytic;
  } else {
    std::vector<std::size_t> all(p.num_blocks());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Vec r = residual_interval_bound(p, all, p.b());
    d.D_X_S = 0.5 * r.squaredNorm();
    if (std::isfinite(d.D_X_S)) d.dx_provenance = Provenance::Analytic;
  }
  if (p.reference && p.reference->y.size() == p.m()) {
    d.D_Y_star = p.reference->y.norm();
    d.dy_provenance = Provenance::Reference;
  }
  return d;
}

}  // namespace exgap
