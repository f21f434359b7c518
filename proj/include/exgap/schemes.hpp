// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "exgap/problem.hpp"
#include "exgap/schedule.hpp"
#include "exgap/smoothing.hpp"
#include "exgap/subsolver.hpp"

namespace exgap {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Scheme { TwoP1D, OneP2D, TwoP1D_SC, OneP2D_SC, OneP2D_LG, I1P2D, I2P1D, ADMM_New, PADMM_New };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::TwoP1D: return "two_p1d";
    case Scheme::OneP2D: return "one_p2d";
    case Scheme::TwoP1D_SC: return "two_p1d_sc";
    case Scheme::OneP2D_SC: return "one_p2d_sc";
    case Scheme::OneP2D_LG: return "one_p2d_lg";
    case Scheme::I1P2D: return "i1p2d";
    case Scheme::I2P1D: return "i2p1d";
    case Scheme::ADMM_New: return "admm_new";
    case Scheme::PADMM_New: return "padmm_new";
  }
  return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
  for (Scheme v : {Scheme::TwoP1D, Scheme::OneP2D, Scheme::TwoP1D_SC, Scheme::OneP2D_SC, Scheme::OneP2D_LG,
                   Scheme::I1P2D, Scheme::I2P1D, Scheme::ADMM_New, Scheme::PADMM_New})
    if (s == to_string(v)) return v;
  throw Error("bad-scheme", "unknown scheme '" + s + "'");
}

inline bool is_generic(Scheme s) { return s == Scheme::TwoP1D || s == Scheme::OneP2D; }
inline bool is_sc(Scheme s) { return s == Scheme::TwoP1D_SC || s == Scheme::OneP2D_SC; }
inline bool is_admm(Scheme s) { return s == Scheme::ADMM_New || s == Scheme::PADMM_New; }
inline bool uses_smoother(Scheme s) { return !is_sc(s) && !is_admm(s); }

struct CPolicy {
  enum class Kind { Const, Kick, DecreaseByDiameter } kind = Kind::Const;
  std::optional<double> c;  // unset: the value the matching theorem uses
  double s = 10.0;
  double mult = 1.02;
  int cadence = 5;
};

enum class DeltaPolicy { Fixed, QBudget };
enum class CenterPolicy { Fixed, PreviousArgmin };
enum class StartVariant { PrimalFirst, DualFirst };

struct SolverConfig {
  Scheme scheme = Scheme::OneP2D;
  SmootherKind smoother = SmootherKind::Bregman;
  std::optional<Vec> xc;
  CPolicy c_policy;
  std::optional<double> gamma0;  // unset: Auto
  std::optional<int> K_total;
  double eps_f = 1e-6;
  double eps_x = 1e-6;
  bool stop_on_tolerance = true;
  int max_iter = 1000;
  double delta0 = 1e-4;
  DeltaPolicy delta_policy = DeltaPolicy::QBudget;
  double inner_delta = 1e-9;  // tolerance when an exact smoother argmin is emulated
  int inner_max_iter = -1;
  double admm_inner_delta = 1e-7;
  bool certify = false;
  StartVariant start = StartVariant::PrimalFirst;
  CenterPolicy center_policy = CenterPolicy::Fixed;
};

enum class Status { Converged, MaxIter, CertificateFailed, InnerBudget };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::MaxIter: return "max_iter";
    case Status::CertificateFailed: return "certificate_failed";
    case Status::InnerBudget: return "inner_budget";
  }
  return "?";
}

struct Counters {
  long prox = 0, A = 0, At = 0;
  Counters& operator+=(const Counters& o) {
    prox += o.prox;
    A += o.A;
    At += o.At;
    return *this;
  }
};

struct IterationRecord {
  int k = 0;
  double f_val = kNaN;
  double obj_residual = kNaN;
  double feas_abs = kNaN;
  double feas_rel = kNaN;
  double gamma = kNaN;
  double beta = kNaN;
  double tau = kNaN;
  double psi = kNaN;
  long inner_iters = 0;
  long long wall_ns = 0;
  double feas_bound = kNaN;
  double obj_upper = kNaN;
  double obj_lower = kNaN;
  double smoothed_gap = kNaN;
};

struct Trace {
  std::vector<IterationRecord> records;
  std::vector<Counters> step_ops;  // step k -> k+1
  Counters start_ops;
  Status status = Status::MaxIter;
  Vec x, y;
  std::vector<std::string> events;
  Scheme scheme = Scheme::OneP2D;
  SmootherKind smoother = SmootherKind::Bregman;
  bool certifiable = true;
  std::string disabled_reason;
  std::string schedule_note;
  double gamma0 = kNaN, beta0 = kNaN, c0 = kNaN, L_bar = kNaN;
  int K = -1;
  double q0 = kNaN, delta0 = kNaN;
  double sigma_f = kNaN, norm_sq = kNaN;
  std::vector<double> ref_dist;  // ||xbar^k - x_ref|| per record when a reference exists
};

struct PrimalDualIterate {
  Vec x_bar, y_bar, residual;
  double f_val = kNaN;
};

/// Everything a step needs besides the iterate.
struct SolverContext {
  const ConstrainedProblem* p = nullptr;
  SolverConfig cfg;
  SmootherConfig sm;
  double gamma0 = 1.0;
  double c0 = 0.0;
  double lf = 0.0;  // strongly convex variants: ||A||^2 / sigma_f
  Vec xc1;          // ADMM block-1 center
  std::vector<double> scaled_identity;  // ADMM: d if A_i'A_i = d I, else 0
  std::vector<double> alpha;            // PADMM step sizes
};

struct SolverState {
  int k = 0;
  Vec x, y, r;  // xbar, ybar, cached A xbar - b
  Vec aty;      // cached A' ybar (two-primal-step kernels)
  ScheduleState sch;
  Vec x_inner;  // ADMM: non-averaged (x1, x2)
  Vec warm;     // inner solver warm start
  Vec r_star, r_star_prev;
  double delta = kNaN;
  double qdelta = kInf;
  double q0 = kNaN;
  double r_tilde_norm = kNaN;
};

struct StepInfo {
  double psi = kNaN;
  long inner = 0;
  Counters ops;
  Vec x_star;
  bool inner_budget = false;
  std::vector<std::string> events;
};

namespace detail {

inline Vec clampd(const SolverContext& c, const Vec& v) { return sense_clamp(c.p->sense(), v); }

struct Oracle {
  Vec x, r;
  long inner = 0;
  bool budget = false;
};

inline InnerResult run_inner(const std::function<InnerResult()>& f, bool& budget) {
  try {
    return f();
  } catch (const InnerBudgetError& e) {
    budget = true;
    return e.result;
  }
}

// x*_gamma(y) and its residual. aty, when given, is A'y already paid for.
inline Oracle smoothed_oracle(const SolverContext& c, SolverState& s, const Vec& y, const Vec* aty, double gamma,
                              double delta, Counters& ops) {
  const auto& p = *c.p;
  Oracle o;
  if (c.sm.kind == SmootherKind::Bregman) {
    Vec at;
    if (!aty) {
      at = p.A().adjoint_apply(y);
      ++ops.At;
    }
    o.x = bregman_argmin_aty(p, c.sm, aty ? *aty : at, gamma);
    ++ops.prox;
  } else {
    InnerTolerance tol{delta, InnerCriterion::ObjectiveGap};
    Vec warm = s.warm.size() ? s.warm : c.sm.xc;
    InnerResult res = run_inner(
        [&] { return aug_lagrangian_argmin(p, y, gamma, tol, warm, c.cfg.inner_max_iter); }, o.budget);
    o.x = res.x;
    o.inner = res.iters;
    s.warm = o.x;
    if (!aty) ++ops.At;
    ++ops.prox;
  }
  o.r = p.A().apply(o.x) - p.b();
  ++ops.A;
  return o;
}

// prox_{Sf}(xh, yh; beta) given A'yh.
inline Vec prox_sf(const SolverContext& c, const Vec& xh, const Vec& yh, const Vec& atyh, double beta, double delta,
                   long& inner, bool& budget, Counters& ops) {
  const auto& p = *c.p;
  ++ops.prox;
  if (c.sm.kind == SmootherKind::Bregman) {
    double lam = beta / c.sm.L_bar;
    return p.prox(lam, xh - lam * atyh);
  }
  InnerTolerance tol{delta, InnerCriterion::ObjectiveGap};
  InnerResult res =
      run_inner([&] { return inexact_prox_Af(p, xh, yh, beta, c.sm.L_bar, tol, xh, c.cfg.inner_max_iter); }, budget);
  inner += res.iters;
  return res.x;
}

// argmin_x f(x) + (A'y)'x for strongly convex blocks f = base + (s/2)||x - c||^2.
inline Vec sc_argmin(const ConstrainedProblem& p, const Vec& aty) {
  Vec x(p.n());
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const auto& blk = p.block(i);
    if (!(blk.f.quad_sigma > 0)) throw Error("needs-strong-convexity", "block without a quadratic term");
    double s = blk.f.quad_sigma;
    p.slice(x, i) = prox_base(blk.f, blk.set, 1.0 / s, blk.f.quad_center - p.slice(aty, i) / s);
  }
  return x;
}

}  // namespace detail

/// Per-step parameters of the generic kernels.
struct StepParams {
  double tau, gamma, beta, gamma_next, beta_next, c;
};

inline StepParams generic_params(const ScheduleState& sch) {
  ScheduleState nx = update_gamma_beta(sch);
  return {sch.tau, sch.gamma, sch.beta, nx.gamma, nx.beta, sch.c};
}

/// One (2P1D) step with explicit parameters.
inline StepInfo kernel_2p1d(const SolverContext& c, SolverState& s, const StepParams& q) {
  const auto& p = *c.p;
  StepInfo info;
  double delta = c.cfg.scheme == Scheme::I2P1D ? s.delta : c.cfg.inner_delta;
  detail::Oracle o = detail::smoothed_oracle(c, s, s.y, c.sm.kind == SmootherKind::Bregman ? &s.aty : nullptr,
                                             q.gamma, delta, info.ops);
  info.inner += o.inner;
  info.inner_budget |= o.budget;
  Vec xh = (1 - q.tau) * s.x + q.tau * o.x;
  Vec rh = (1 - q.tau) * s.r + q.tau * o.r;
  Vec yh = detail::clampd(c, rh / q.beta_next);
  Vec atyh = p.A().adjoint_apply(yh);
  ++info.ops.At;
  bool budget = false;
  Vec xn = detail::prox_sf(c, xh, yh, atyh, q.beta_next, delta, info.inner, budget, info.ops);
  info.inner_budget |= budget;
  s.r = p.A().apply(xn) - p.b();
  ++info.ops.A;
  s.x = std::move(xn);
  s.y = detail::clampd(c, (1 - q.tau) * s.y + q.tau * yh);
  s.aty = (1 - q.tau) * s.aty + q.tau * atyh;
  double fr = feasibility(p.sense(), o.r);
  info.psi = q.tau * q.tau / (2 * q.beta_next) * fr * fr;
  info.x_star = std::move(o.x);
  s.r_star_prev = std::move(s.r_star);
  s.r_star = std::move(o.r);
  return info;
}

/// One (1P2D) step with explicit parameters. In certification mode psi is
/// evaluated with one extra smoothed argmin at ybar.
inline StepInfo kernel_1p2d(const SolverContext& c, SolverState& s, const StepParams& q, bool certify) {
  const auto& p = *c.p;
  StepInfo info;
  if (!(q.gamma_next > 0)) throw Error("bad-gamma", "gamma_{k+1} must be positive");
  Vec yh = detail::clampd(c, (1 - q.tau) * s.y + q.tau * detail::clampd(c, dual_center(s.r, q.beta)));
  detail::Oracle o = detail::smoothed_oracle(c, s, yh, nullptr, q.gamma_next, c.cfg.inner_delta, info.ops);
  info.inner += o.inner;
  info.inner_budget |= o.budget;
  if (certify) {
    SolverState scratch = s;
    detail::Oracle ob = detail::smoothed_oracle(c, scratch, s.y, nullptr, q.gamma_next, c.cfg.inner_delta, info.ops);
    double d_hat = prox_distance(c.sm, o.x, o.r + p.b());
    double d_bar = prox_distance(c.sm, ob.x, ob.r + p.b());
    info.psi = q.tau * (1 - q.tau) * q.gamma * (d_hat - q.c * d_bar);
  }
  s.x = (1 - q.tau) * s.x + q.tau * o.x;
  s.r = (1 - q.tau) * s.r + q.tau * o.r;
  s.y = detail::clampd(c, yh + (q.gamma_next / c.sm.L_bar) * o.r);
  info.x_star = std::move(o.x);
  s.r_star_prev = std::move(s.r_star);
  s.r_star = std::move(o.r);
  return info;
}

/// Generic (2P1D) step: kernel plus the parameter update, then a_{k+1} with c_next.
inline StepInfo step_2p1d(const SolverContext& c, SolverState& s, std::optional<double> c_next = std::nullopt) {
  StepInfo info = kernel_2p1d(c, s, generic_params(s.sch));
  s.sch = advance(s.sch, c_next.value_or(s.sch.c_base));
  ++s.k;
  return info;
}

inline StepInfo step_1p2d(const SolverContext& c, SolverState& s, bool certify = false,
                          std::optional<double> c_next = std::nullopt) {
  StepInfo info = kernel_1p2d(c, s, generic_params(s.sch), certify);
  s.sch = advance(s.sch, c_next.value_or(s.sch.c_base));
  ++s.k;
  return info;
}

/// (1P2D) under the Lipschitz-gradient rule.
inline StepInfo step_1p2d_lg(const SolverContext& c, SolverState& s, bool certify = false) {
  LgStep nx = lg_update(s.k, s.sch.gamma, s.sch.beta, s.sch.L_bar);
  StepParams q{nx.tau, s.sch.gamma, s.sch.beta, nx.gamma, nx.beta, 1.0 / (1.0 + nx.tau)};
  StepInfo info = kernel_1p2d(c, s, q, certify);
  ++s.k;
  s.sch.k = s.k;
  s.sch.gamma = nx.gamma;
  s.sch.beta = nx.beta;
  s.sch.tau = lg_tau(s.k);
  s.sch.a = 1.0 / s.sch.tau;
  return info;
}

/// Strongly convex variants: no primal smoothing; beta and tau follow the
/// strongly convex rule.
inline StepInfo step_sc(const SolverContext& c, SolverState& s, Scheme flavor) {
  const auto& p = *c.p;
  if (!(p.sigma_f() > 0)) throw Error("needs-strong-convexity", "sigma_f must be positive");
  StepInfo info;
  double tau = s.sch.tau, beta = s.sch.beta;
  if (flavor == Scheme::OneP2D_SC) {
    Vec yh = detail::clampd(c, (1 - tau) * s.y + tau * detail::clampd(c, dual_center(s.r, beta)));
    Vec aty = p.A().adjoint_apply(yh);
    Vec xs = detail::sc_argmin(p, aty);
    Vec rs = p.A().apply(xs) - p.b();
    info.ops = {1, 1, 1};
    s.x = (1 - tau) * s.x + tau * xs;
    s.r = (1 - tau) * s.r + tau * rs;
    s.y = detail::clampd(c, yh + rs / c.lf);
    info.x_star = std::move(xs);
    s.r_star_prev = std::move(s.r_star);
    s.r_star = std::move(rs);
  } else if (flavor == Scheme::TwoP1D_SC) {
    Vec xs = detail::sc_argmin(p, s.aty);
    Vec rs = p.A().apply(xs) - p.b();
    Vec xh = (1 - tau) * s.x + tau * xs;
    Vec rh = (1 - tau) * s.r + tau * rs;
    Vec yh = detail::clampd(c, rh / beta);
    Vec atyh = p.A().adjoint_apply(yh);
    double lam = beta / p.norm_sq();
    s.x = p.prox(lam, xh - lam * atyh);
    s.r = p.A().apply(s.x) - p.b();
    info.ops = {2, 2, 1};
    s.y = detail::clampd(c, (1 - tau) * s.y + tau * yh);
    s.aty = (1 - tau) * s.aty + tau * atyh;
    info.x_star = std::move(xs);
    s.r_star_prev = std::move(s.r_star);
    s.r_star = std::move(rs);
  } else {
    throw Error("bad-scheme", "step_sc needs a strongly convex flavor");
  }
  info.psi = 0.0;
  s.sch.beta = (1 - tau) * beta;
  s.sch.tau = sc_next_tau(tau);
  s.sch.a = 1.0 / s.sch.tau;
  ++s.k;
  s.sch.k = s.k;
  return info;
}

/// Inexact (1P2D) with the augmented-Lagrangian smoother, gamma = 1, c = 0.
/// With DeltaPolicy::QBudget, delta_k is chosen so that q_k delta_k does not
/// exceed q_{k-1} delta_{k-1}, where
/// q_k = (1-tau_k) tau_k ||ybar - ybar*_k|| + ||A x~ - b|| + delta_k/2
/// is the quantity that bounds -psi_k along the actual trajectory.
inline StepInfo step_i1p2d(const SolverContext& c, SolverState& s) {
  const auto& p = *c.p;
  StepInfo info;
  double tau = s.sch.tau, beta = s.sch.beta, gamma = s.sch.gamma;
  Vec ystar = dual_center(s.r, beta);
  Vec yh = (1 - tau) * s.y + tau * ystar;
  double ydist = (1 - tau) * tau * (s.y - ystar).norm();
  double delta = c.cfg.delta0;
  if (s.k > 0 && c.cfg.delta_policy == DeltaPolicy::QBudget) {
    double q_est = ydist + s.r_tilde_norm + s.delta / 2;
    delta = std::min(s.delta, s.qdelta / q_est);
  }
  InnerTolerance tol{delta, InnerCriterion::ObjectiveGap};
  InnerResult res;
  Vec rt;
  double q = 0.0;
  for (int attempt = 0;; ++attempt) {
    tol.delta = delta;
    bool budget = false;
    Vec warm = s.warm.size() ? s.warm : s.x;
    res = detail::run_inner([&] { return aug_lagrangian_argmin(p, yh, gamma, tol, warm, c.cfg.inner_max_iter); },
                            budget);
    info.inner += res.iters;
    info.inner_budget |= budget;
    s.warm = res.x;
    rt = p.A().apply(res.x) - p.b();
    q = ydist + rt.norm() + delta / 2;
    if (s.k == 0 || c.cfg.delta_policy != DeltaPolicy::QBudget || q * delta <= s.qdelta * (1 + 1e-12) ||
        attempt >= 30)
      break;
    delta = 0.9 * s.qdelta / q;
    info.events.push_back("delta-shrunk k=" + std::to_string(s.k));
  }
  info.ops = {1, 1, 1};
  if (info.inner_budget) info.events.push_back("inner-budget k=" + std::to_string(s.k));
  if (s.k == 0) {
    s.q0 = q;
    s.qdelta = q * delta;
  } else if (c.cfg.delta_policy == DeltaPolicy::QBudget) {
    s.qdelta = std::min(s.qdelta, q * delta);
  }
  s.delta = delta;
  double rn = rt.norm();
  s.r_tilde_norm = rn;
  info.psi = 0.5 * tau * gamma * rn * rn - ydist * delta - gamma * delta * rn - 0.5 * gamma * delta * delta;
  s.x = (1 - tau) * s.x + tau * res.x;
  s.r = (1 - tau) * s.r + tau * rt;
  s.y = yh + gamma * rt;
  info.x_star = res.x;
  s.r_star_prev = std::move(s.r_star);
  s.r_star = std::move(rt);
  s.sch = advance(s.sch, 0.0);
  ++s.k;
  return info;
}

/// Inexact (2P1D); no certificate is attached to this variant.
inline StepInfo step_i2p1d(const SolverContext& c, SolverState& s) {
  StepInfo info = kernel_2p1d(c, s, generic_params(s.sch));
  if (info.inner_budget) info.events.push_back("inner-budget k=" + std::to_string(s.k));
  s.sch = advance(s.sch, 0.0);
  ++s.k;
  return info;
}

struct AdmmParams {
  double tau, beta, gamma_next, rho, eta;
};

inline AdmmParams admm_step_params(int k, double gamma0) {
  AdmmSchedule a = admm_params(k, gamma0), b = admm_params(k + 1, gamma0);
  return {a.tau, a.beta, b.gamma, a.rho, a.eta};
}

namespace detail {

// argmin_{x in X_i} f_i(x) + (kappa/2)||A_i x - t||^2.
inline Vec admm_block_solve(const SolverContext& c, std::size_t bi, double kappa, const Vec& t, const Vec& warm,
                            StepInfo& info) {
  const auto& p = *c.p;
  const Block& blk = p.block(bi);
  double d = c.scaled_identity[bi];
  if (d > 0) return prox_eval(blk.f, blk.set, 1.0 / (kappa * d), blk.A.adjoint_apply(t) / d);
  if ((blk.f.kind == FuncKind::Zero || blk.f.kind == FuncKind::SquaredL2) && blk.set.kind == SetKind::All &&
      (blk.f.quad_sigma > 0 || blk.A.cols() <= blk.A.rows())) {
    // quadratic block: (s I + kappa A'A) x = s c + kappa A't
    const Mat a = blk.A.to_dense();
    const Index n = a.cols();
    Mat h = kappa * a.transpose() * a;
    Vec rhs = kappa * a.transpose() * t;
    if (blk.f.quad_sigma > 0) {
      h.diagonal().array() += blk.f.quad_sigma;
      rhs += blk.f.quad_sigma * (blk.f.quad_center.size() ? blk.f.quad_center : Vec::Zero(n));
    }
    return h.ldlt().solve(rhs);
  }
  CompositeObjective obj{std::span<const Block>(&blk, 1), &blk.A, p.block_norm_sq(bi), Vec::Zero(t.size()), kappa, t};
  InnerTolerance tol{c.cfg.admm_inner_delta, InnerCriterion::ObjectiveGap};
  bool budget = false;
  InnerResult r = run_inner([&] { return fista_solve(obj, warm, tol, c.cfg.inner_max_iter); }, budget);
  info.inner += r.iters;
  if (budget) {
    info.inner_budget = true;
    info.events.push_back("inner-budget block=" + std::to_string(bi));
  }
  return r.x;
}

}  // namespace detail

/// New ADMM variant. Both subproblems use yhat as the multiplier; the state
/// keeps the non-averaged pair (x1, x2) in x_inner.
inline StepInfo kernel_admm(const SolverContext& c, SolverState& s, const AdmmParams& q, bool linearized) {
  const auto& p = *c.p;
  require(p.num_blocks() == 2, "needs-two-blocks", "ADMM variants need exactly two blocks");
  StepInfo info;
  const Block& b1 = p.block(0);
  const Block& b2 = p.block(1);
  Vec x1 = p.slice(s.x_inner, 0), x2 = p.slice(s.x_inner, 1);
  Vec yh = detail::clampd(c, (1 - q.tau) * s.y + q.tau * detail::clampd(c, s.r / q.beta));
  Vec a2x2 = b2.A.apply(x2);
  double kappa = q.gamma_next + q.rho;
  Vec x1n, x2n;
  if (!linearized) {
    Vec t = (q.gamma_next * b1.A.apply(c.xc1) + q.rho * (p.b() - a2x2) - yh) / kappa;
    x1n = detail::admm_block_solve(c, 0, kappa, t, x1, info);
    Vec a1x1 = b1.A.apply(x1n);
    Vec t2 = p.b() - a1x1 - yh / q.eta;
    x2n = detail::admm_block_solve(c, 1, q.eta, t2, x2, info);
  } else {
    Vec a1x1 = b1.A.apply(x1);
    Vec g1 = q.rho * b1.A.adjoint_apply(a1x1 + a2x2 - p.b()) +
             q.gamma_next * b1.A.adjoint_apply(a1x1 - b1.A.apply(c.xc1)) + b1.A.adjoint_apply(yh);
    double l1 = c.alpha[0] / kappa;
    x1n = prox_eval(b1.f, b1.set, l1, x1 - l1 * g1);
    Vec a1n = b1.A.apply(x1n);
    Vec g2 = q.eta * b2.A.adjoint_apply(a1n + a2x2 - p.b()) + b2.A.adjoint_apply(yh);
    double l2 = c.alpha[1] / q.eta;
    x2n = prox_eval(b2.f, b2.set, l2, x2 - l2 * g2);
  }
  p.slice(s.x_inner, 0) = x1n;
  p.slice(s.x_inner, 1) = x2n;
  Vec rn = p.A().apply(s.x_inner) - p.b();
  s.x = (1 - q.tau) * s.x + q.tau * s.x_inner;
  s.r = (1 - q.tau) * s.r + q.tau * rn;
  s.y = detail::clampd(c, yh + q.eta * rn);
  info.ops = {2, 3, 3};
  info.x_star = s.x_inner;
  s.r_star_prev = std::move(s.r_star);
  s.r_star = std::move(rn);
  return info;
}

inline StepInfo step_admm_new(const SolverContext& c, SolverState& s) {
  StepInfo info = kernel_admm(c, s, admm_step_params(s.k, c.gamma0), false);
  ++s.k;
  return info;
}

inline StepInfo step_padmm_new(const SolverContext& c, SolverState& s) {
  StepInfo info = kernel_admm(c, s, admm_step_params(s.k, c.gamma0), true);
  ++s.k;
  return info;
}

/// Resolved gamma0 and c for a scheme/smoother pair (the theorem values).
struct AutoParams {
  double gamma0;
  double c;
};

inline AutoParams auto_params(Scheme s, SmootherKind sm, double L_bar, std::optional<int> K) {
  switch (s) {
    case Scheme::TwoP1D:
      if (sm == SmootherKind::AugLag) return {1.0, 0.0};
      return {std::sqrt(L_bar), 1.0};
    case Scheme::OneP2D:
      if (sm == SmootherKind::AugLag) return {1.0, 0.0};
      if (!K) throw Error("missing-K", "one_p2d with the Bregman smoother needs K_total");
      return {2.0 * std::sqrt(2.0 * L_bar) / (*K + 1.0), 0.0};
    case Scheme::OneP2D_LG:
      return {std::sqrt(L_bar), 0.0};
    case Scheme::I1P2D:
    case Scheme::I2P1D:
      return {1.0, 0.0};
    case Scheme::ADMM_New:
    case Scheme::PADMM_New:
      return {3.0, 0.0};
    default:
      return {kNaN, kNaN};
  }
}

/// Scheme/smoother/problem compatibility, mirrored by docs/variant_matrix.txt.
inline bool scheme_accepts_smoother(Scheme s, SmootherKind k) {
  switch (s) {
    case Scheme::TwoP1D:
    case Scheme::OneP2D:
      return true;
    case Scheme::OneP2D_LG:
      return k == SmootherKind::Bregman;
    case Scheme::I1P2D:
    case Scheme::I2P1D:
      return k == SmootherKind::AugLag;
    default:
      return true;  // smoother not used
  }
}

inline void validate_config(const ConstrainedProblem& p, const SolverConfig& cfg) {
  if (uses_smoother(cfg.scheme) && !scheme_accepts_smoother(cfg.scheme, cfg.smoother))
    throw Error("scheme-smoother", std::string(to_string(cfg.scheme)) + " does not accept the " +
                                       to_string(cfg.smoother) + " smoother");
  if (is_sc(cfg.scheme) && !(p.sigma_f() > 0))
    throw Error("needs-strong-convexity", "strongly convex schemes need sigma_f > 0 on every block");
  if (is_admm(cfg.scheme) && p.num_blocks() != 2) throw Error("needs-two-blocks", "ADMM variants need two blocks");
  if (cfg.scheme == Scheme::OneP2D && cfg.smoother == SmootherKind::Bregman && !cfg.K_total)
    throw Error("missing-K", "one_p2d with the Bregman smoother needs K_total");
  if (cfg.smoother == SmootherKind::AugLag && uses_smoother(cfg.scheme) && p.sense() != ConstraintSense::Equality)
    throw Error("sense", "augmented Lagrangian smoother needs equality constraints");
  if (cfg.max_iter < 0) throw Error("bad-config", "max_iter must be nonnegative");
  if (cfg.gamma0 && !(*cfg.gamma0 > 0)) throw Error("bad-config", "gamma0 must be positive");
  if (cfg.c_policy.c && !(*cfg.c_policy.c > -1.0 && *cfg.c_policy.c <= 1.0)) throw Error("bad-c", "c must lie in (-1,1]");
  if (cfg.delta0 <= 0) throw Error("bad-config", "delta0 must be positive");
}

inline SolverContext make_context(const ConstrainedProblem& p, const SolverConfig& cfg) {
  validate_config(p, cfg);
  SolverContext c;
  c.p = &p;
  c.cfg = cfg;
  if (uses_smoother(cfg.scheme)) {
    c.sm = cfg.smoother == SmootherKind::Bregman ? bregman_smoother(p, cfg.xc) : auglag_smoother(p, cfg.xc);
    AutoParams ap = auto_params(cfg.scheme, cfg.smoother, c.sm.L_bar, cfg.K_total);
    c.gamma0 = cfg.gamma0.value_or(ap.gamma0);
    c.c0 = cfg.c_policy.c.value_or(ap.c);
  } else {
    c.sm.xc = cfg.xc ? *cfg.xc : p.project(Vec::Zero(p.n()));
    c.sm.S_xc = c.sm.xc;
    c.sm.L_bar = p.norm_sq();
  }
  if (is_sc(cfg.scheme)) c.lf = p.norm_sq() / p.sigma_f();
  if (is_admm(cfg.scheme)) {
    c.gamma0 = cfg.gamma0.value_or(3.0);
    c.xc1 = p.slice(c.sm.xc, 0);
    for (std::size_t i = 0; i < 2; ++i) {
      const Mat a = p.block(i).A.to_dense();
      Mat g = a.transpose() * a;
      double d = g.diagonal().mean();
      bool ident = a.rows() > 0 && d > 0 && (g - d * Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= 1e-14 * d;
      c.scaled_identity.push_back(ident ? d : 0.0);
      // step 1/||A_i||^2 from the raw power estimate (without the safety factor)
      c.alpha.push_back(kNormSafety / p.block_norm_sq(i));
    }
  }
  return c;
}

/// Starting points. PrimalFirst: x0 = x*_{gamma0}(0), y0 = (A x0 - b)/beta0.
/// DualFirst: y0 = (A xc - b)/beta0, x0 = prox_{Sf}(xc, y0; beta0).
inline SolverState start_point(const SolverContext& c, double gamma0, double beta0, StartVariant v, Counters& ops) {
  const auto& p = *c.p;
  if (beta0 * gamma0 < c.sm.L_bar * (1 - 1e-15))
    throw Error("init-product", "beta0*gamma0 < Lbar", beta0 * gamma0 - c.sm.L_bar);
  SolverState s;
  Vec zero = Vec::Zero(p.m());
  if (v == StartVariant::PrimalFirst) {
    detail::Oracle o = detail::smoothed_oracle(c, s, zero, nullptr, gamma0,
                                               c.cfg.scheme == Scheme::I1P2D || c.cfg.scheme == Scheme::I2P1D
                                                   ? c.cfg.delta0
                                                   : c.cfg.inner_delta,
                                               ops);
    s.x = o.x;
    s.r = o.r;
    s.y = detail::clampd(c, dual_center(s.r, beta0));
  } else {
    Vec rc = p.A().apply(c.sm.xc) - p.b();
    ++ops.A;
    s.y = detail::clampd(c, dual_center(rc, beta0));
    Vec aty = p.A().adjoint_apply(s.y);
    ++ops.At;
    long inner = 0;
    bool budget = false;
    s.x = detail::prox_sf(c, c.sm.xc, s.y, aty, beta0, c.cfg.inner_delta, inner, budget, ops);
    s.r = p.A().apply(s.x) - p.b();
    ++ops.A;
  }
  s.aty = p.A().adjoint_apply(s.y);
  ++ops.At;
  return s;
}

inline double relative_feasibility(const ConstrainedProblem& p, const Vec& r) {
  return feasibility(p.sense(), r) / std::max(1.0, p.b().norm());
}

/// G_{gamma beta}(xbar, ybar) for the Bregman smoother; the strongly convex
/// variants use the unsmoothed dual (gamma = 0).
inline double measure_gap(const SolverContext& c, const Vec& x, const Vec& y, double gamma, double beta) {
  const auto& p = *c.p;
  double fr = feasibility(p.sense(), p.residual(x));
  if (is_sc(c.cfg.scheme)) {
    Vec xs = detail::sc_argmin(p, p.A().adjoint_apply(y));
    double g = p.objective(xs) + y.dot(p.residual(xs));
    return p.objective(x) - g + fr * fr / (2 * beta);
  }
  if (c.sm.kind != SmootherKind::Bregman) return kNaN;
  return smoothed_gap(p, c.sm, x, y, gamma, beta);
}

/// Algorithm driver: start point, steps, stopping rule, certification mode
/// contraction checks, trace records.
inline Trace solve(const ConstrainedProblem& p, const SolverConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  SolverContext c = make_context(p, cfg);
  Trace tr;
  tr.scheme = cfg.scheme;
  tr.smoother = cfg.smoother;
  tr.L_bar = c.sm.L_bar;
  tr.norm_sq = p.norm_sq();
  tr.sigma_f = p.sigma_f();
  tr.K = cfg.K_total.value_or(-1);
  tr.delta0 = cfg.delta0;

  SolverState s;
  const Scheme sc = cfg.scheme;
  if (is_sc(sc)) {
    Vec x0 = detail::sc_argmin(p, Vec::Zero(p.n()));
    s.x = x0;
    s.r = p.A().apply(x0) - p.b();
    s.y = detail::clampd(c, s.r / c.lf);
    s.aty = p.A().adjoint_apply(s.y);
    tr.start_ops = {1, 1, 1};
    s.sch.variant = ScheduleVariant::StronglyConvex;
    s.sch.beta = c.lf;
    s.sch.tau = sc_tau0();
    s.sch.a = 1.0 / s.sch.tau;
    s.sch.gamma = kNaN;
    s.sch.L_bar = c.lf;
    tr.beta0 = c.lf;
  } else if (is_admm(sc)) {
    s.x_inner = c.sm.xc;
    s.y = Vec::Zero(p.m());
    s.r = p.A().apply(s.x_inner) - p.b();
    AdmmParams q0 = admm_step_params(0, c.gamma0);
    // start: subproblem steps and dual step with yhat = 0 (tau = 0)
    AdmmParams qs{0.0, q0.beta, q0.gamma_next, q0.rho, q0.eta};
    s.x = s.x_inner;
    StepInfo si = kernel_admm(c, s, qs, sc == Scheme::PADMM_New);
    s.x = s.x_inner;
    s.r = p.A().apply(s.x) - p.b();
    tr.start_ops = si.ops;
    s.sch.variant = ScheduleVariant::ADMM;
    tr.gamma0 = c.gamma0;
    tr.beta0 = admm_params(0, c.gamma0).beta;
  } else {
    double gamma0 = c.gamma0;
    if (sc == Scheme::OneP2D_LG) {
      s.sch.variant = ScheduleVariant::LipschitzGrad;
      s.sch.gamma = s.sch.beta = std::sqrt(c.sm.L_bar);
      s.sch.L_bar = c.sm.L_bar;
      s.sch.tau = lg_tau(0);
      s.sch.a = 2.0;
      tr.schedule_note = "lipschitz-gradient rule shifted: tau_k = 1/(k+2)";
    } else {
      s.sch = init_schedule(sc == Scheme::TwoP1D || sc == Scheme::I2P1D ? ScheduleVariant::Generic2P1D
                                                                         : ScheduleVariant::Generic1P2D,
                            c.c0, gamma0, c.sm.L_bar);
    }
    SolverState st = start_point(c, s.sch.gamma, s.sch.beta, cfg.start, tr.start_ops);
    st.sch = s.sch;
    s = std::move(st);
    tr.gamma0 = s.sch.gamma;
    tr.beta0 = s.sch.beta;
    tr.c0 = s.sch.c;
    if (sc == Scheme::I1P2D) s.delta = cfg.delta0;
  }

  // Certificates assume the published schedules.
  if (cfg.c_policy.kind != CPolicy::Kind::Const) {
    tr.certifiable = false;
    tr.disabled_reason = "tuned c policy";
  } else if (cfg.center_policy != CenterPolicy::Fixed) {
    tr.certifiable = false;
    tr.disabled_reason = "moving prox center";
  } else if (uses_smoother(sc) && sc != Scheme::OneP2D_LG && sc != Scheme::I2P1D) {
    AutoParams ap = auto_params(sc, cfg.smoother, c.sm.L_bar, cfg.K_total);
    if (std::abs(c.gamma0 - ap.gamma0) > 1e-15 * ap.gamma0 || c.c0 != ap.c) {
      tr.certifiable = false;
      tr.disabled_reason = "gamma0 or c differs from the theorem values";
    }
  } else if (sc == Scheme::I2P1D || sc == Scheme::PADMM_New) {
    tr.certifiable = false;
    tr.disabled_reason = "no certificate for this variant";
  }
  if (is_admm(sc) && c.gamma0 != 3.0) {
    tr.certifiable = false;
    tr.disabled_reason = "gamma0 differs from 3";
  }

  const auto& ref = p.reference;
  auto make_record = [&](const SolverState& st, const StepInfo* info, double gap) {
    IterationRecord r;
    r.k = st.k;
    r.f_val = p.objective(st.x);
    if (ref) r.obj_residual = r.f_val - ref->f_star;
    Vec res = p.residual(st.x);
    r.feas_abs = feasibility(p.sense(), res);
    r.feas_rel = relative_feasibility(p, res);
    if (is_admm(sc)) {
      AdmmSchedule a = admm_params(st.k, c.gamma0);
      r.gamma = a.gamma;
      r.beta = a.beta;
      r.tau = a.tau;
    } else {
      r.gamma = st.sch.gamma;
      r.beta = st.sch.beta;
      r.tau = st.sch.tau;
    }
    if (info) {
      r.psi = info->psi;
      r.inner_iters = info->inner;
    }
    r.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();
    r.smoothed_gap = gap;
    if (ref && ref->x.size() == p.n()) tr.ref_dist.push_back((st.x - ref->x).norm());
    return r;
  };

  const bool certify = cfg.certify;
  const bool check_contraction = certify && is_generic(sc) && cfg.smoother == SmootherKind::Bregman &&
                                 cfg.center_policy == CenterPolicy::Fixed;
  double gap = kNaN;
  if (certify && (is_sc(sc) || c.sm.kind == SmootherKind::Bregman) && !is_admm(sc))
    gap = measure_gap(c, s.x, s.y, s.sch.gamma, s.sch.beta);
  tr.records.push_back(make_record(s, nullptr, gap));

  tr.status = Status::MaxIter;
  for (int it = 0; it < cfg.max_iter; ++it) {
    // kick heuristic: F_k = ||A xbar - b||, H_k = gamma_k ||A(x*_k - x*_{k-1})||
    if (cfg.c_policy.kind == CPolicy::Kind::Kick && is_generic(sc) && s.k % cfg.c_policy.cadence == 0 &&
        s.r_star.size() && s.r_star_prev.size()) {
      double F = feasibility(p.sense(), s.r);
      double H = s.sch.gamma * (s.r_star - s.r_star_prev).norm();
      s.sch = kick_gamma(s.sch, F, H, cfg.c_policy.s, cfg.c_policy.mult);
    }
    const double tau_k = s.sch.tau;
    const Vec x_prev = s.x;
    StepInfo info;
    std::optional<double> c_next;
    switch (sc) {
      case Scheme::TwoP1D: info = kernel_2p1d(c, s, generic_params(s.sch)); break;
      case Scheme::OneP2D: info = kernel_1p2d(c, s, generic_params(s.sch), check_contraction); break;
      case Scheme::OneP2D_LG: info = step_1p2d_lg(c, s, false); break;
      case Scheme::TwoP1D_SC:
      case Scheme::OneP2D_SC: info = step_sc(c, s, sc); break;
      case Scheme::I1P2D: info = step_i1p2d(c, s); break;
      case Scheme::I2P1D: info = step_i2p1d(c, s); break;
      case Scheme::ADMM_New: info = step_admm_new(c, s); break;
      case Scheme::PADMM_New: info = step_padmm_new(c, s); break;
    }
    if (is_generic(sc)) {
      if (cfg.c_policy.kind == CPolicy::Kind::DecreaseByDiameter) {
        DiameterEstimates d = estimate_diameters(p, c.sm);
        if (d.dx_provenance == Provenance::Analytic && d.D_X_S > 0) {
          Vec ax = info.x_star.size() ? p.A().apply(info.x_star) : Vec();
          c_next = std::clamp(prox_distance(c.sm, info.x_star, ax) / d.D_X_S, 0.0, 1.0);
        }
      }
      s.sch = advance(s.sch, c_next.value_or(s.sch.c_base));
      ++s.k;
    }
    if (cfg.center_policy == CenterPolicy::PreviousArgmin && info.x_star.size() && uses_smoother(sc)) {
      c.sm.xc = info.x_star;
      c.sm.S_xc = c.sm.S == SChoice::Identity ? c.sm.xc : p.A().apply(c.sm.xc);
    }
    for (auto& e : info.events) tr.events.push_back(e);
    tr.step_ops.push_back(info.ops);

    double gap_next = kNaN;
    if (certify && (is_sc(sc) || c.sm.kind == SmootherKind::Bregman) && !is_admm(sc))
      gap_next = measure_gap(c, s.x, s.y, s.sch.gamma, s.sch.beta);
    tr.records.push_back(make_record(s, &info, gap_next));

    if (check_contraction) {
      double g_prev = tr.records[tr.records.size() - 2].smoothed_gap;
      double slack = 1e-7 * (1 + std::abs(g_prev));
      if (gap_next > (1 - tau_k) * g_prev - info.psi + slack) {
        tr.status = Status::CertificateFailed;
        tr.events.push_back("contraction violated k=" + std::to_string(s.k));
        break;
      }
    }
    if (info.inner_budget && cfg.inner_max_iter == 0) {
      tr.status = Status::InnerBudget;
      break;
    }
    if (cfg.stop_on_tolerance) {
      double dx = (s.x - x_prev).norm() / std::max(1.0, x_prev.norm());
      if (tr.records.back().feas_rel <= cfg.eps_f && dx <= cfg.eps_x) {
        tr.status = Status::Converged;
        break;
      }
    }
  }
  if (sc == Scheme::I1P2D) tr.q0 = s.q0;
  tr.x = s.x;
  tr.y = s.y;
  return tr;
}

}  // namespace exgap
