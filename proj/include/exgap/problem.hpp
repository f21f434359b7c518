// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exgap/linop.hpp"
#include "exgap/prox.hpp"

namespace exgap {

enum class ConstraintSense { Equality, Inequality };

struct Block {
  FunctionSpec f;
  FeasibleSet set;
  LinearMap A;
};

struct Reference {
  Vec x, y;
  double f_star = 0.0;
  std::string provenance;
};

struct ProblemMeta {
  std::string family;
  std::uint64_t seed = 0;
  Index s = 0;
  double noise = 0.0;
  std::string notes;
  Vec planted;  // generating solution, when there is one
};

/// min sum_i f_i(x_i) s.t. sum_i A_i x_i = b (or <= b), x_i in X_i.
class ConstrainedProblem {
 public:
  ConstrainedProblem() = default;
  ConstrainedProblem(std::vector<Block> blocks, Vec b, ConstraintSense sense = ConstraintSense::Equality)
      : blocks_(std::move(blocks)), b_(std::move(b)), sense_(sense) {
    require(!blocks_.empty(), "shape", "problem needs at least one block");
    std::vector<Mat> mats;
    offsets_.push_back(0);
    for (auto& blk : blocks_) {
      require(blk.A.rows() == b_.size(), "shape", "block rows differ from length of b");
      check_spec(blk.f, blk.set, blk.A.cols());
      if (!blk.A.norm_sq()) blk.A = blk.A.with_norm_sq(spectral_norm_sq(blk.A));
      mats.push_back(blk.A.to_dense());
      offsets_.push_back(offsets_.back() + blk.A.cols());
    }
    op_ = mats.size() == 1 ? LinearMap::dense(mats[0]) : LinearMap::hconcat(std::move(mats));
    if (blocks_.size() == 1) op_ = op_.with_norm_sq(*blocks_[0].A.norm_sq());
    else op_ = op_.with_norm_sq(spectral_norm_sq(op_));
  }

  Index m() const { return b_.size(); }
  Index n() const { return offsets_.back(); }
  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(std::size_t i) const { return blocks_[i]; }
  Index offset(std::size_t i) const { return offsets_[i]; }
  const Vec& b() const { return b_; }
  ConstraintSense sense() const { return sense_; }
  const LinearMap& A() const { return op_; }
  /// Safety-scaled estimate of ||A||^2.
  double norm_sq() const { return *op_.norm_sq(); }
  double block_norm_sq(std::size_t i) const { return *blocks_[i].A.norm_sq(); }

  auto slice(const Vec& x, std::size_t i) const { return x.segment(offsets_[i], blocks_[i].A.cols()); }
  auto slice(Vec& x, std::size_t i) const { return x.segment(offsets_[i], blocks_[i].A.cols()); }

  Vec residual(const Vec& x) const { return op_.apply(x) - b_; }

  double objective(const Vec& x) const {
    require(x.size() == n(), "shape", "objective argument length");
    double v = 0.0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) v += func_eval(blocks_[i].f, blocks_[i].set, slice(x, i));
    return v;
  }

  bool in_domain(const Vec& x) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      if (!blocks_[i].set.contains(slice(x, i))) return false;
    return true;
  }

  /// Blockwise prox with one lambda per block.
  Vec prox(const std::vector<double>& lambda, const Vec& v) const {
    Vec z(n());
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      slice(z, i) = prox_eval(blocks_[i].f, blocks_[i].set, lambda[i], slice(v, i));
    return z;
  }
  Vec prox(double lambda, const Vec& v) const { return prox(std::vector<double>(blocks_.size(), lambda), v); }

  /// Strong convexity modulus of the sum (0 unless every block has one).
  double sigma_f() const {
    double s = kInf;
    for (const auto& blk : blocks_) s = std::min(s, blk.f.sigma_f);
    return s;
  }

  Vec project(const Vec& x) const {
    Vec z(n());
    for (std::size_t i = 0; i < blocks_.size(); ++i) slice(z, i) = blocks_[i].set.project(slice(x, i));
    return z;
  }

  std::optional<Reference> reference;
  ProblemMeta meta;

 private:
  std::vector<Block> blocks_;
  Vec b_;
  ConstraintSense sense_ = ConstraintSense::Equality;
  std::vector<Index> offsets_;
  LinearMap op_;
};

/// Componentwise [v]_+ used by every dual formula when the constraint is Ax <= b.
inline Vec dual_update_inequality(const Vec& v) { return v.cwiseMax(0.0); }

inline Vec sense_clamp(ConstraintSense s, const Vec& v) {
  return s == ConstraintSense::Inequality ? dual_update_inequality(v) : v;
}

/// Violation measure: ||Ax-b|| for equalities, ||[Ax-b]_+|| for inequalities.
inline double feasibility(ConstraintSense s, const Vec& r) { return sense_clamp(s, r).norm(); }

}  // namespace exgap
