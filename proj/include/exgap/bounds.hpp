// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "exgap/schemes.hpp"

namespace exgap {

enum class BoundVariant { Thm41a, Thm41b, Thm41c, Cor51, Cor52, Cor61, Thm53 };

inline const char* to_string(BoundVariant v) {
  switch (v) {
    case BoundVariant::Thm41a: return "thm41a";
    case BoundVariant::Thm41b: return "thm41b";
    case BoundVariant::Thm41c: return "thm41c";
    case BoundVariant::Cor51: return "cor51";
    case BoundVariant::Cor52: return "cor52";
    case BoundVariant::Cor61: return "cor61";
    case BoundVariant::Thm53: return "thm53";
  }
  return "?";
}

inline BoundVariant bound_variant_from_string(const std::string& s) {
  for (BoundVariant v : {BoundVariant::Thm41a, BoundVariant::Thm41b, BoundVariant::Thm41c, BoundVariant::Cor51,
                         BoundVariant::Cor52, BoundVariant::Cor61, BoundVariant::Thm53})
    if (s == to_string(v)) return v;
  throw Error("bad-bound", "unknown bound variant '" + s + "'");
}

struct BoundConstants {
  std::optional<double> L_bar, D_X, D_Y, sigma_f, A_norm, K, q0, delta0, D1, DA;
};

/// Closed-form envelopes as functions of k. The lower objective bound is a
/// function of the measured feasibility value.
class BoundSet {
 public:
  BoundSet(BoundVariant v, BoundConstants c) : v_(v), c_(c) { check(); }

  BoundVariant variant() const { return v_; }
  const BoundConstants& constants() const { return c_; }

  double feas_bound(int k) const {
    double kk = k;
    switch (v_) {
      case BoundVariant::Thm41a: return 8.0 * *c_.D_Y / ((kk + 1) * (kk + 1));
      case BoundVariant::Thm41b:
        return std::sqrt(*c_.L_bar) * (2.0 * *c_.D_Y + std::sqrt(2.0 * *c_.D_X)) / (kk + 1);
      case BoundVariant::Thm41c:
        return 2.0 * std::sqrt(2.0 * *c_.L_bar) * (*c_.D_Y + std::sqrt(*c_.D_X)) / (*c_.K + 1);
      case BoundVariant::Cor51:
        return 4.0 * *c_.A_norm * *c_.A_norm * *c_.D_Y / ((kk + 2) * (kk + 2) * *c_.sigma_f);
      case BoundVariant::Cor52:
        return 2.0 * std::sqrt(2.0 * *c_.L_bar) * (*c_.D_Y + std::sqrt(*c_.D_X)) / (kk + 1);
      case BoundVariant::Cor61: return 6.0 * (*c_.D_Y + std::sqrt(*c_.D1 + 4.0 * *c_.DA)) / (kk + 2);
      case BoundVariant::Thm53: {
        double k1 = (kk + 1) * (kk + 1);
        return 4.0 / k1 * (2.0 * *c_.D_Y + std::sqrt(14.0 * *c_.q0 * *c_.delta0 / k1));
      }
    }
    return kNaN;
  }

  double obj_upper(int k) const {
    double kk = k;
    switch (v_) {
      case BoundVariant::Thm41a:
      case BoundVariant::Cor51: return 0.0;
      case BoundVariant::Thm41b: return std::sqrt(*c_.L_bar) * *c_.D_X / (kk + 1);
      case BoundVariant::Thm41c: return 2.0 * std::sqrt(2.0 * *c_.L_bar) * *c_.D_X / (*c_.K + 1);
      case BoundVariant::Cor52: return 2.0 * std::sqrt(2.0 * *c_.L_bar) * *c_.D_X / (kk + 1);
      case BoundVariant::Cor61: return 6.0 * d_max() / (kk + 2);
      case BoundVariant::Thm53: return 7.0 * *c_.q0 * *c_.delta0;
    }
    return kNaN;
  }

  /// Lower bound on f(xbar) - f* given the measured ||A xbar - b||.
  double obj_lower(int k, double feas) const {
    switch (v_) {
      case BoundVariant::Thm41a:
      case BoundVariant::Thm53: return -0.5 * feas * feas - *c_.D_Y * feas;
      case BoundVariant::Cor61: return -obj_upper(k);
      default: return -*c_.D_Y * feas;
    }
  }

  /// ||xbar - x*|| bound (strongly convex case only).
  std::optional<double> iterate_bound(int k) const {
    if (v_ != BoundVariant::Cor51) return std::nullopt;
    return 4.0 * *c_.A_norm * *c_.D_Y / ((k + 2.0) * *c_.sigma_f);
  }

  /// False where only the lower objective bound is asserted (the final-K
  /// statement checked before iteration K).
  bool applies(int k) const { return v_ != BoundVariant::Thm41c || !final_only_ || k == int(*c_.K); }
  void set_final_only(bool f) { final_only_ = f; }

  double d_max() const {
    double s = std::sqrt(*c_.D1 + 4.0 * *c_.DA);
    return std::max(*c_.D1 + 3.0 * *c_.DA, *c_.D_Y * (*c_.D_Y + s));
  }

 private:
  void check() const {
    std::vector<std::pair<const char*, const std::optional<double>*>> need;
    auto add = [&](const char* n, const std::optional<double>& v) { need.emplace_back(n, &v); };
    switch (v_) {
      case BoundVariant::Thm41a: add("D_Y_star", c_.D_Y); break;
      case BoundVariant::Thm41b:
      case BoundVariant::Cor52:
        add("L_bar", c_.L_bar);
        add("D_Y_star", c_.D_Y);
        add("D_X_S", c_.D_X);
        break;
      case BoundVariant::Thm41c:
        add("L_bar", c_.L_bar);
        add("D_Y_star", c_.D_Y);
        add("D_X_S", c_.D_X);
        add("K", c_.K);
        break;
      case BoundVariant::Cor51:
        add("A_norm", c_.A_norm);
        add("sigma_f", c_.sigma_f);
        add("D_Y_star", c_.D_Y);
        break;
      case BoundVariant::Cor61:
        add("D_Y_star", c_.D_Y);
        add("D1", c_.D1);
        add("DA", c_.DA);
        break;
      case BoundVariant::Thm53:
        add("D_Y_star", c_.D_Y);
        add("q0", c_.q0);
        add("delta0", c_.delta0);
        break;
    }
    std::string missing;
    for (auto& [name, v] : need)
      if (!*v || !std::isfinite(**v) || **v < 0) missing += (missing.empty() ? "" : ",") + std::string(name);
    if (!missing.empty()) throw Error("missing-constant", missing);
    if (c_.sigma_f && v_ == BoundVariant::Cor51 && !(*c_.sigma_f > 0)) throw Error("missing-constant", "sigma_f");
  }

  BoundVariant v_;
  BoundConstants c_;
  bool final_only_ = true;
};

inline BoundSet bounds_thm41(char which, const BoundConstants& c) {
  switch (which) {
    case 'a': return BoundSet(BoundVariant::Thm41a, c);
    case 'b': return BoundSet(BoundVariant::Thm41b, c);
    case 'c': return BoundSet(BoundVariant::Thm41c, c);
  }
  throw Error("bad-bound", "theorem 4.1 variant must be a, b or c");
}

inline BoundSet bounds_cor51(double A_norm, double sigma_f, double D_Y) {
  BoundConstants c;
  c.A_norm = A_norm;
  c.sigma_f = sigma_f;
  c.D_Y = D_Y;
  return BoundSet(BoundVariant::Cor51, c);
}
/// D1 = max over X_1 of (1/2)||A_1(x_1 - xc_1)||^2 and D^A = max over X of
/// (1/2)||Ax - b||^2, both over-estimated by interval arithmetic.
inline BoundConstants cor61_constants(const ConstrainedProblem& p, const Vec& xc, double D_Y) {
  require(p.num_blocks() == 2, "needs-two-blocks", "the ADMM bound needs two blocks");
  BoundConstants c;
  c.D_Y = D_Y;
  Vec shift = p.block(0).A.apply(p.slice(xc, 0));
  c.D1 = 0.5 * residual_interval_bound(p, {0}, shift).squaredNorm();
  c.DA = 0.5 * residual_interval_bound(p, {0, 1}, p.b()).squaredNorm();
  return c;
}

inline BoundSet bounds_cor52(const BoundConstants& c) { return BoundSet(BoundVariant::Cor52, c); }
inline BoundSet bounds_cor61(const BoundConstants& c) { return BoundSet(BoundVariant::Cor61, c); }
inline BoundSet bounds_thm53(const BoundConstants& c) { return BoundSet(BoundVariant::Thm53, c); }

struct CertificateEntry {
  int k = 0;
  bool feas_ok = true, upper_ok = true, lower_ok = true, iterate_ok = true;
  double margin = kInf;  // smallest (allowed - observed) over the checks
  bool ok() const { return feas_ok && upper_ok && lower_ok && iterate_ok; }
};

struct CertificateReport {
  bool disabled = false;
  std::string reason;
  std::string variant;
  std::vector<CertificateEntry> entries;
  double worst_margin = kInf;
  int first_failure = -1;
  int checked = 0;
  bool passed() const { return !disabled && first_failure < 0; }
};

inline CertificateReport disabled_report(std::string reason) {
  CertificateReport r;
  r.disabled = true;
  r.reason = std::move(reason);
  return r;
}

/// Checks every record against the bound set. f values come from the trace;
/// ref_dist (optional) holds ||xbar^k - x*|| per record.
inline CertificateReport certify(const std::vector<IterationRecord>& records, const BoundSet& bs, double f_star,
                                 double tol_rel = 1e-6, const std::vector<double>* ref_dist = nullptr) {
  CertificateReport rep;
  rep.variant = to_string(bs.variant());
  if (records.empty()) return disabled_report("empty");
  const double abs_floor = 1e-12;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    CertificateEntry e;
    e.k = r.k;
    ++rep.checked;
    const bool full = bs.applies(r.k);
    double gap = r.f_val - f_star;
    if (full) {
      double fb = bs.feas_bound(r.k);
      double feas_allow = fb * (1 + tol_rel) + abs_floor;
      e.feas_ok = r.feas_abs <= feas_allow;
      e.margin = std::min(e.margin, feas_allow - r.feas_abs);
      double up = bs.obj_upper(r.k);
      double up_allow = up + tol_rel * std::max(std::abs(up), std::abs(f_star)) + abs_floor;
      e.upper_ok = gap <= up_allow;
      e.margin = std::min(e.margin, up_allow - gap);
    }
    double lo = bs.obj_lower(r.k, r.feas_abs);
    double lo_allow = lo - tol_rel * std::max(std::abs(lo), std::abs(f_star)) - abs_floor;
    e.lower_ok = gap >= lo_allow;
    e.margin = std::min(e.margin, gap - lo_allow);
    if (auto ib = bs.iterate_bound(r.k); ib && ref_dist && i < ref_dist->size()) {
      double allow = *ib * (1 + tol_rel) + abs_floor;
      e.iterate_ok = (*ref_dist)[i] <= allow;
      e.margin = std::min(e.margin, allow - (*ref_dist)[i]);
    }
    rep.worst_margin = std::min(rep.worst_margin, e.margin);
    if (!e.ok() && rep.first_failure < 0) rep.first_failure = r.k;
    rep.entries.push_back(e);
  }
  return rep;
}

inline CertificateReport certify(const Trace& tr, const BoundSet& bs, double f_star, double tol_rel = 1e-6) {
  if (!tr.certifiable) return disabled_report(tr.disabled_reason);
  return certify(tr.records, bs, f_star, tol_rel, tr.ref_dist.empty() ? nullptr : &tr.ref_dist);
}

/// Fills the bound columns of the trace.
inline void attach_bounds(Trace& tr, const BoundSet& bs) {
  for (auto& r : tr.records) {
    r.obj_lower = bs.obj_lower(r.k, r.feas_abs);
    if (!bs.applies(r.k)) continue;
    r.feas_bound = bs.feas_bound(r.k);
    r.obj_upper = bs.obj_upper(r.k);
  }
}

struct Lemma33State {
  double omega = 1.0;
  double Psi = 0.0;
  double S = kNaN;
  double feas_envelope = kNaN;  // NaN when beta ||y*||^2 + 2 S < 0
  double feas_pair = kNaN;
};

/// omega_k = prod_{j<k}(1 - tau_j), Psi_{j+1} = (1 - tau_j) Psi_j + psi_j,
/// S_k = omega_k G_0 + gamma_k D - Psi_k, from records 0..k (certification mode).
inline Lemma33State lemma33_state(const std::vector<IterationRecord>& records, int k, double D_X, double D_Y) {
  require(k >= 0 && std::size_t(k) < records.size(), "bad-k", "record index out of range");
  Lemma33State s;
  for (int j = 0; j < k; ++j) {
    double tau = records[j].tau, psi = records[j + 1].psi;
    s.omega *= 1 - tau;
    s.Psi = (1 - tau) * s.Psi + (std::isfinite(psi) ? psi : 0.0);
  }
  const auto& r = records[k];
  s.S = s.omega * records[0].smoothed_gap + r.gamma * D_X - s.Psi;
  double disc = r.beta * D_Y * D_Y + 2 * s.S;
  if (disc >= 0) s.feas_envelope = r.beta * (D_Y + std::sqrt(D_Y * D_Y + 2 * s.S / r.beta));
  s.feas_pair = 2 * r.beta * D_Y + std::sqrt(2 * r.gamma * r.beta * D_X);
  return s;
}

}  // namespace exgap
