// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "exgap/error.hpp"
#include "exgap/linop.hpp"

namespace exgap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kFeasTol = 1e-12;

enum class FuncKind { Zero, L1, GroupL2, SquaredL2, L2Norm, HingeSum, IndicatorZero };

inline const char* to_string(FuncKind k) {
  switch (k) {
    case FuncKind::Zero: return "zero";
    case FuncKind::L1: return "l1";
    case FuncKind::GroupL2: return "group_l2";
    case FuncKind::SquaredL2: return "squared_l2";
    case FuncKind::L2Norm: return "l2_norm";
    case FuncKind::HingeSum: return "hinge_sum";
    case FuncKind::IndicatorZero: return "indicator_zero";
  }
  return "?";
}

/// Convex term f_i. Every kind may carry an additive quadratic
/// (quad_sigma/2)||x - quad_center||^2 + quad_const; SquaredL2 is that
/// quadratic alone.
struct FunctionSpec {
  FuncKind kind = FuncKind::Zero;
  Vec weights;                 // L1: one per coordinate; GroupL2: one per group
  std::vector<int> group_of;   // GroupL2: group id of every coordinate
  double scale = 1.0;          // L2Norm, HingeSum
  Vec labels;                  // HingeSum, entries +-1
  double quad_sigma = 0.0;
  Vec quad_center;
  double quad_const = 0.0;
  double sigma_f = 0.0;
  std::optional<double> lips_grad;

  int num_groups() const {
    int g = 0;
    for (int id : group_of) g = std::max(g, id + 1);
    return g;
  }
};

inline FunctionSpec zero_fn() { return {}; }

inline FunctionSpec l1_fn(Vec w) {
  FunctionSpec f;
  f.kind = FuncKind::L1;
  f.weights = std::move(w);
  return f;
}
inline FunctionSpec l1_fn(Index n, double lambda) { return l1_fn(Vec::Constant(n, lambda)); }

inline FunctionSpec group_l2_fn(std::vector<int> group_of, Vec w) {
  FunctionSpec f;
  f.kind = FuncKind::GroupL2;
  f.group_of = std::move(group_of);
  f.weights = std::move(w);
  return f;
}

inline FunctionSpec squared_l2_fn(double sigma, Vec center) {
  FunctionSpec f;
  f.kind = FuncKind::SquaredL2;
  f.quad_sigma = sigma;
  f.quad_center = std::move(center);
  f.sigma_f = sigma;
  if (sigma <= 0) throw Error("bad-spec", "squared_l2 needs sigma > 0");
  return f;
}

inline FunctionSpec l2_norm_fn(double scale = 1.0) {
  FunctionSpec f;
  f.kind = FuncKind::L2Norm;
  f.scale = scale;
  return f;
}

inline FunctionSpec hinge_sum_fn(Vec labels, double scale = 1.0) {
  FunctionSpec f;
  f.kind = FuncKind::HingeSum;
  f.labels = std::move(labels);
  f.scale = scale;
  return f;
}

inline FunctionSpec indicator_zero_fn() {
  FunctionSpec f;
  f.kind = FuncKind::IndicatorZero;
  return f;
}

/// f + (sigma/2)||x - center||^2, merged with any quadratic already present.
inline FunctionSpec strongly_convexify(const FunctionSpec& f, double sigma, const Vec& center) {
  if (sigma <= 0) throw Error("bad-spec", "strongly_convexify needs sigma > 0");
  FunctionSpec g = f;
  if (g.quad_sigma == 0.0) {
    g.quad_sigma = sigma;
    g.quad_center = center;
  } else {
    double s1 = g.quad_sigma, s2 = sigma, s = s1 + s2;
    Vec c = (s1 * g.quad_center + s2 * center) / s;
    g.quad_const += 0.5 * s1 * (g.quad_center - c).squaredNorm() + 0.5 * s2 * (center - c).squaredNorm();
    g.quad_sigma = s;
    g.quad_center = c;
  }
  g.sigma_f += sigma;
  return g;
}

enum class SetKind { All, Box, NonNeg };

struct FeasibleSet {
  SetKind kind = SetKind::All;
  Vec lo, hi;

  static FeasibleSet all() { return {}; }
  static FeasibleSet nonneg() { return {SetKind::NonNeg, {}, {}}; }
  static FeasibleSet box(Vec l, Vec u) {
    require(l.size() == u.size(), "shape", "box bounds differ in length");
    for (Index i = 0; i < l.size(); ++i)
      if (!(l[i] <= u[i])) throw Error("bad-set", "box needs l <= u");
    return {SetKind::Box, std::move(l), std::move(u)};
  }

  double lower(Index i) const {
    if (kind == SetKind::Box) return lo[i];
    return kind == SetKind::NonNeg ? 0.0 : -kInf;
  }
  double upper(Index i) const { return kind == SetKind::Box ? hi[i] : kInf; }

  bool contains(const Vec& x, double tol = kFeasTol) const {
    for (Index i = 0; i < x.size(); ++i)
      if (x[i] < lower(i) - tol || x[i] > upper(i) + tol || std::isnan(x[i])) return false;
    return true;
  }
  Vec project(const Vec& x) const {
    if (kind == SetKind::All) return x;
    Vec z = x;
    for (Index i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], lower(i), upper(i));
    return z;
  }
  bool bounded() const {
    if (kind != SetKind::Box) return false;
    return lo.allFinite() && hi.allFinite();
  }
};

inline void check_spec(const FunctionSpec& f, const FeasibleSet& set, Index n) {
  if (set.kind == SetKind::Box) require(set.lo.size() == n, "shape", "box length");
  if (f.quad_sigma > 0) require(f.quad_center.size() == n, "shape", "quadratic center length");
  switch (f.kind) {
    case FuncKind::L1:
      require(f.weights.size() == n, "shape", "l1 weights length");
      require((f.weights.array() >= 0).all(), "bad-spec", "negative l1 weight");
      break;
    case FuncKind::GroupL2: {
      require(Index(f.group_of.size()) == n, "shape", "group partition length");
      int ng = f.num_groups();
      require(f.weights.size() == ng, "shape", "group weights length");
      std::vector<int> seen(ng, 0);
      for (int id : f.group_of) {
        require(id >= 0, "bad-spec", "negative group id");
        seen[id] = 1;
      }
      for (int s : seen) require(s == 1, "bad-spec", "empty group in partition");
      break;
    }
    case FuncKind::HingeSum:
      require(f.labels.size() == n, "shape", "hinge labels length");
      for (Index i = 0; i < n; ++i)
        require(f.labels[i] == 1.0 || f.labels[i] == -1.0, "bad-spec", "labels must be +-1");
      break;
    default:
      break;
  }
}

/// f(x) plus the indicator of X; +inf outside X (tolerance kFeasTol per bound).
inline double func_eval(const FunctionSpec& f, const FeasibleSet& set, const Vec& x) {
  if (!set.contains(x)) return kInf;
  double v = 0.0;
  switch (f.kind) {
    case FuncKind::Zero:
    case FuncKind::SquaredL2:
      break;
    case FuncKind::L1:
      require(f.weights.size() == x.size(), "shape", "l1 weights length");
      v = f.weights.dot(x.cwiseAbs());
      break;
    case FuncKind::GroupL2: {
      require(Index(f.group_of.size()) == x.size(), "shape", "group partition length");
      Vec sq = Vec::Zero(f.num_groups());
      for (Index i = 0; i < x.size(); ++i) sq[f.group_of[i]] += x[i] * x[i];
      for (Index g = 0; g < sq.size(); ++g) v += f.weights[g] * std::sqrt(sq[g]);
      break;
    }
    case FuncKind::L2Norm:
      v = f.scale * x.norm();
      break;
    case FuncKind::HingeSum:
      for (Index i = 0; i < x.size(); ++i) v += std::max(0.0, 1.0 - f.labels[i] * x[i]);
      v *= f.scale;
      break;
    case FuncKind::IndicatorZero:
      if (x.cwiseAbs().maxCoeff() > kFeasTol) return kInf;
      break;
  }
  if (f.quad_sigma > 0) v += 0.5 * f.quad_sigma * (x - f.quad_center).squaredNorm() + f.quad_const;
  return v;
}

namespace detail {

inline double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

inline bool unbounded_coords(const FeasibleSet& set, const std::vector<Index>& idx) {
  for (Index i : idx)
    if (std::isfinite(set.lower(i)) || std::isfinite(set.upper(i))) return false;
  return true;
}

// argmin_{z in [l,u]} lw*||z|| + ||z - v||^2 / 2 with l <= 0 <= u. The
// minimizer is clamp(theta*v) where theta in (0,1) solves
// (1-theta)*||clamp(theta*v)||/theta = lw; the left side is strictly
// decreasing in theta, so bisection finds the unique root.
inline Vec group_box_shrink(const Vec& v, const Vec& l, const Vec& u, double lw) {
  const Index d = v.size();
  double lim2 = 0.0;
  for (Index i = 0; i < d; ++i)
    if ((v[i] > 0 && u[i] > 0) || (v[i] < 0 && l[i] < 0)) lim2 += v[i] * v[i];
  if (std::sqrt(lim2) <= lw) return Vec::Zero(d);
  auto clamped = [&](double th) { return Vec((th * v).cwiseMax(l).cwiseMin(u)); };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double h = (1.0 - mid) * clamped(mid).norm() - mid * lw;
    if (h > 0) lo = mid;
    else hi = mid;
  }
  return clamped(0.5 * (lo + hi));
}

inline Vec shrink_group(const Vec& v, const FeasibleSet& set, const std::vector<Index>& idx, double lw) {
  const Index d = Index(idx.size());
  Vec vg(d);
  for (Index j = 0; j < d; ++j) vg[j] = v[idx[j]];
  if (unbounded_coords(set, idx)) {
    double nv = vg.norm();
    if (nv <= lw) return Vec::Zero(d);
    return (1.0 - lw / nv) * vg;
  }
  Vec l(d), u(d);
  for (Index j = 0; j < d; ++j) {
    l[j] = set.lower(idx[j]);
    u[j] = set.upper(idx[j]);
    if (l[j] > 0 || u[j] < 0)
      throw Error("no-prox-rule", "group norm with a box that excludes 0 on the group");
  }
  return group_box_shrink(vg, l, u, lw);
}

}  // namespace detail

/// argmin_{z in X} base(z) + ||z - v||^2/(2 lambda), ignoring any quadratic
/// attached to f.
inline Vec prox_base(const FunctionSpec& f, const FeasibleSet& set, double lambda, const Vec& v) {
  if (!(lambda > 0)) throw Error("bad-lambda", "prox needs lambda > 0");
  const Index n = v.size();
  Vec z(n);
  switch (f.kind) {
    case FuncKind::Zero:
    case FuncKind::SquaredL2:
      return set.project(v);
    case FuncKind::L1:
      require(f.weights.size() == n, "shape", "l1 weights length");
      for (Index i = 0; i < n; ++i) z[i] = detail::soft(v[i], lambda * f.weights[i]);
      return set.project(z);
    case FuncKind::HingeSum:
      require(f.labels.size() == n, "shape", "hinge labels length");
      for (Index i = 0; i < n; ++i) {
        double y = f.labels[i], u = y * v[i], lw = lambda * f.scale, s;
        if (u > 1.0) s = u;
        else if (u < 1.0 - lw) s = u + lw;
        else s = 1.0;
        z[i] = y * s;
      }
      return set.project(z);
    case FuncKind::IndicatorZero:
      for (Index i = 0; i < n; ++i)
        if (set.lower(i) > 0 || set.upper(i) < 0)
          throw Error("no-prox-rule", "indicator of 0 with a set excluding 0");
      return Vec::Zero(n);
    case FuncKind::L2Norm: {
      std::vector<Index> idx(n);
      for (Index i = 0; i < n; ++i) idx[i] = i;
      return detail::shrink_group(v, set, idx, lambda * f.scale);
    }
    case FuncKind::GroupL2: {
      require(Index(f.group_of.size()) == n, "shape", "group partition length");
      std::vector<std::vector<Index>> groups(f.num_groups());
      for (Index i = 0; i < n; ++i) groups[f.group_of[i]].push_back(i);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        Vec zg = detail::shrink_group(v, set, groups[g], lambda * f.weights[Index(g)]);
        for (std::size_t j = 0; j < groups[g].size(); ++j) z[groups[g][j]] = zg[Index(j)];
      }
      return z;
    }
  }
  throw Error("no-prox-rule", to_string(f.kind));
}

/// argmin_{z in X} f(z) + ||z - v||^2/(2 lambda). An attached quadratic
/// (s/2)||z-c||^2 is folded in exactly:
/// prox_{lambda f}(v) = prox_{lambda' base}((v + lambda s c)/(1 + lambda s)), lambda' = lambda/(1 + lambda s).
inline Vec prox_eval(const FunctionSpec& f, const FeasibleSet& set, double lambda, const Vec& v) {
  if (!(lambda > 0)) throw Error("bad-lambda", "prox needs lambda > 0");
  if (f.quad_sigma > 0) {
    double d = 1.0 + lambda * f.quad_sigma;
    return prox_base(f, set, lambda / d, (v + lambda * f.quad_sigma * f.quad_center) / d);
  }
  return prox_base(f, set, lambda, v);
}

namespace detail {

// Support function of the box over the coordinates idx, applied to d.
// Entries with |d_j| <= tol count as 0 so that rounding does not hit an
// infinite bound.
inline double box_support(const FeasibleSet& set, const std::vector<Index>& idx, const Vec& d, double tol = 0.0) {
  double v = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    double dj = d[Index(j)];
    if (std::abs(dj) <= tol) continue;
    if (dj > 0) v += dj * set.upper(idx[j]);
    else if (dj < 0) v += dj * set.lower(idx[j]);
    if (std::isinf(v)) return kInf;
  }
  return v;
}

// Upper bound on sup_{z in box} s'z - w||z||. By minimax the value equals
// min_{||u|| <= w} support_box(s - u); any feasible u gives a bound. We try
// u = w z/||z|| at the hint z and u = projection of s onto the ball.
inline double group_box_conj(const Vec& sg, const FeasibleSet& set, const std::vector<Index>& idx, double w,
                             const Vec* hint) {
  const Index d = sg.size();
  double ns = sg.norm();
  Vec u = ns <= w ? sg : Vec(sg * (w / ns));
  const double tol = 1e-12 * w;
  double best = box_support(set, idx, sg - u, tol);
  if (hint) {
    Vec z(d);
    for (Index j = 0; j < d; ++j) z[j] = (*hint)[idx[j]];
    double nz = z.norm();
    if (nz > 0) best = std::min(best, box_support(set, idx, sg - z * (w / nz), tol));
  }
  return best;
}

}  // namespace detail

/// Conjugate of f + indicator(X) at s: sup_{x in X} s'x - f(x).
/// Returns +inf outside the domain. For group norms over a box the value is
/// an upper bound (exact at a hint that attains the supremum).
inline double conj_eval(const FunctionSpec& f, const FeasibleSet& set, const Vec& s, const Vec* hint = nullptr) {
  const Index n = s.size();
  if (f.quad_sigma > 0) {
    Vec x = prox_base(f, set, 1.0 / f.quad_sigma, f.quad_center + s / f.quad_sigma);
    return s.dot(x) - func_eval(f, set, x);
  }
  // Concave piecewise-linear per coordinate: sup over candidate points once
  // the asymptotic slopes are checked.
  // Slopes within tol of zero count as flat: s on the boundary of the
  // subdifferential is a rounding away from +inf otherwise.
  auto pl_sup = [&](auto&& phi, double l, double u, double slope_pos, double slope_neg,
                    std::initializer_list<double> kinks, double tol = 0.0) {
    if (!std::isfinite(u) && slope_pos > tol) return kInf;
    if (!std::isfinite(l) && slope_neg < -tol) return kInf;
    double best = -kInf;
    bool any = false;
    auto try_at = [&](double x) {
      if (std::isfinite(x) && x >= l && x <= u) {
        best = std::max(best, phi(x));
        any = true;
      }
    };
    try_at(l);
    try_at(u);
    for (double k : kinks) try_at(k);
    if (!any) best = phi(0.0);  // unbounded both ways with flat slopes
    return best;
  };
  double total = 0.0;
  switch (f.kind) {
    case FuncKind::Zero:
    case FuncKind::SquaredL2:
      for (Index i = 0; i < n; ++i) {
        double si = s[i];
        total += pl_sup([&](double x) { return si * x; }, set.lower(i), set.upper(i), si, si, {0.0});
      }
      return total;
    case FuncKind::L1:
      for (Index i = 0; i < n; ++i) {
        double si = s[i], w = f.weights[i];
        total += pl_sup([&](double x) { return si * x - w * std::abs(x); }, set.lower(i), set.upper(i),
                        si - w, si + w, {0.0}, 1e-12 * w);
      }
      return total;
    case FuncKind::HingeSum:
      for (Index i = 0; i < n; ++i) {
        double si = s[i], y = f.labels[i], w = f.scale;
        double sp = y > 0 ? si : si - w;  // slope as x -> +inf
        double sn = y > 0 ? si + w : si;  // slope as x -> -inf
        total += pl_sup([&](double x) { return si * x - w * std::max(0.0, 1.0 - y * x); }, set.lower(i),
                        set.upper(i), sp, sn, {y}, 1e-12 * w);
      }
      return total;
    case FuncKind::IndicatorZero:
      return 0.0;
    case FuncKind::L2Norm: {
      std::vector<Index> idx(n);
      for (Index i = 0; i < n; ++i) idx[i] = i;
      if (!detail::unbounded_coords(set, idx)) return detail::group_box_conj(s, set, idx, f.scale, hint);
      return s.norm() <= f.scale * (1 + 1e-15) ? 0.0 : kInf;
    }
    case FuncKind::GroupL2: {
      std::vector<std::vector<Index>> groups(f.num_groups());
      for (Index i = 0; i < n; ++i) groups[f.group_of[i]].push_back(i);
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& idx = groups[g];
        Vec sg(Index(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) sg[Index(j)] = s[idx[j]];
        double w = f.weights[Index(g)];
        if (detail::unbounded_coords(set, idx)) {
          if (sg.norm() > w * (1 + 1e-15)) return kInf;
        } else {
          total += detail::group_box_conj(sg, set, idx, w, hint);
        }
      }
      return total;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace exgap
