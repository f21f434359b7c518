// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>

#include "exgap/error.hpp"

namespace exgap {

enum class ScheduleVariant { Generic2P1D, Generic1P2D, StronglyConvex, LipschitzGrad, ADMM };

/// Parameters at iteration k. For the generic variants beta*gamma equals
/// Lbar*tau_{k-1}^2 (Lbar at k = 0) whenever the recursion is followed.
struct ScheduleState {
  int k = 0;
  double a = 1.0;
  double tau = 1.0;
  double gamma = 1.0;
  double beta = 1.0;
  double c = 0.0;       // c_k applied in the next gamma update
  double c_base = 0.0;  // c used by the a_k recursion; kicks leave it alone
  double L_bar = 1.0;
  ScheduleVariant variant = ScheduleVariant::Generic2P1D;
};

inline double product_slack(double rhs) { return 1e-12 * std::max(1.0, std::abs(rhs)); }

inline double init_a(double c0) {
  if (!(c0 > -1.0 && c0 <= 1.0)) throw Error("bad-c", "c0 must lie in (-1, 1]", c0);
  return 0.5 * (1.0 + c0 + std::sqrt(4.0 * (1.0 - c0) + (1.0 + c0) * (1.0 + c0)));
}

inline double next_a(double a, double c_next) {
  return 0.5 * (1.0 + c_next + std::sqrt(4.0 * a * a + (1.0 - c_next) * (1.0 - c_next)));
}

inline ScheduleState init_schedule(ScheduleVariant v, double c0, double gamma0, double L_bar) {
  ScheduleState s;
  s.variant = v;
  s.c = s.c_base = c0;
  s.a = init_a(c0);
  s.tau = 1.0 / s.a;
  s.gamma = gamma0;
  s.beta = L_bar / gamma0;
  s.L_bar = L_bar;
  return s;
}

/// beta_{k+1} = (1 - tau_k) beta_k, gamma_{k+1} = (1 - c_k tau_k) gamma_k;
/// checks beta_{k+1} gamma_{k+1} >= Lbar tau_k^2.
inline ScheduleState update_gamma_beta(ScheduleState s) {
  s.beta *= 1.0 - s.tau;
  s.gamma *= 1.0 - s.c * s.tau;
  double rhs = s.L_bar * s.tau * s.tau;
  if (!(s.beta * s.gamma >= rhs - product_slack(rhs)))
    throw Error("contraction-broken", "beta*gamma < Lbar*tau^2 after update", s.beta * s.gamma - rhs);
  return s;
}

/// Full generic transition k -> k+1 with the next recursion constant.
inline ScheduleState advance(ScheduleState s, double c_next) {
  s = update_gamma_beta(s);
  s.a = next_a(s.a, c_next);
  s.tau = 1.0 / s.a;
  s.c = s.c_base = c_next;
  ++s.k;
  return s;
}

/// If primal_gap >= s_trig * dual_gap, replace c_k by -(mult-1)/tau_k so the
/// next gamma is mult*gamma_k. The a_k recursion is untouched, so
/// beta*gamma only grows relative to Lbar*tau^2.
inline ScheduleState kick_gamma(ScheduleState s, double primal_gap, double dual_gap, double s_trig,
                                double mult = 1.02) {
  if (!std::isfinite(s_trig)) return s;
  if (primal_gap >= s_trig * dual_gap) s.c = -(mult - 1.0) / s.tau;
  return s;
}

/// tau_{k+1} = (tau_k/2)(sqrt(tau_k^2 + 4) - tau_k).
inline double sc_next_tau(double tau) { return 0.5 * tau * (std::sqrt(tau * tau + 4.0) - tau); }

inline double sc_tau0() { return 0.5 * (std::sqrt(5.0) - 1.0); }

struct LgStep {
  double gamma, beta, tau;
};

/// Lipschitz-gradient rule with the start index shifted: tau_k = 1/(k+2),
/// gamma_{k+1} = gamma_k/(1 + tau_k), beta_{k+1} = (1 - tau_k) beta_k.
inline double lg_tau(int k) { return 1.0 / (k + 2.0); }

inline LgStep lg_update(int k, double gamma, double beta, double L_bar) {
  if (k < 0) throw Error("bad-k", "k must be nonnegative");
  double tau = lg_tau(k);
  LgStep r{(1.0 - tau / (1.0 + tau)) * gamma, (1.0 - tau) * beta, tau};
  double rhs = L_bar * tau * tau;
  if (!(r.gamma * r.beta >= rhs - product_slack(rhs)))
    throw Error("contraction-broken", "gamma*beta < Lbar*tau^2 in the Lipschitz-gradient rule");
  return r;
}

struct AdmmSchedule {
  double tau, gamma, beta, rho, eta;
};

inline AdmmSchedule admm_params(int k, double gamma0) {
  require(gamma0 > 0, "bad-gamma", "gamma0 must be positive");
  double kk = k;
  return {3.0 / (kk + 4.0), 2.0 * gamma0 / (kk + 2.0), 9.0 * (kk + 3.0) / (gamma0 * (kk + 1.0) * (kk + 7.0)),
          3.0 * gamma0 / ((kk + 3.0) * (kk + 4.0)), gamma0 / (kk + 3.0)};
}

struct RateBounds {
  double a_lo, a_hi;    // (k + a0 + s_k)/2 <= a_k <= k + a0
  double bg_lo, bg_hi;  // Lbar/(k+a0)^2 <= gamma_{k+1} beta_{k+1} <= 4 Lbar/(k+a0+s_k)^2
};

inline RateBounds rate_bounds(int k, double a0, double s_k, double L_bar) {
  double lo = k + a0 + s_k, hi = k + a0;
  return {0.5 * lo, hi, L_bar / (hi * hi), 4.0 * L_bar / (lo * lo)};
}

/// beta_{k+1} for c == 1 is beta0/(k+2); for c == 0 it lies in
/// [beta0/(k+2)^2, 4 beta0/(k+1)^2].
inline double beta_c1(int k, double beta0) { return beta0 / (k + 2.0); }
inline double beta_c0_lo(int k, double beta0) { return beta0 / ((k + 2.0) * (k + 2.0)); }
inline double beta_c0_hi(int k, double beta0) { return 4.0 * beta0 / ((k + 1.0) * (k + 1.0)); }

}  // namespace exgap
