// Copyright (c) 2026 The exgap Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "exgap/error.hpp"

namespace exgap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Linear map x -> Ax stored as one dense matrix, a horizontal concatenation
/// [A_1 ... A_p] or a block diagonal of dense blocks.
///
/// apply() accumulates columns left to right, so a concatenation and its
/// materialized dense matrix give bitwise identical products.
class LinearMap {
 public:
  enum class Layout { Dense, HConcat, BlockDiag };

  LinearMap() = default;

  static LinearMap dense(Mat a) {
    LinearMap op;
    op.layout_ = Layout::Dense;
    op.rows_ = a.rows();
    op.cols_ = a.cols();
    op.blocks_.push_back(std::move(a));
    op.index();
    return op;
  }

  static LinearMap hconcat(std::vector<Mat> blocks) {
    require(!blocks.empty(), "shape", "empty concatenation");
    LinearMap op;
    op.layout_ = Layout::HConcat;
    op.rows_ = blocks.front().rows();
    for (const auto& b : blocks) {
      require(b.rows() == op.rows_, "shape", "blocks differ in row count");
      op.cols_ += b.cols();
    }
    op.blocks_ = std::move(blocks);
    op.index();
    return op;
  }

  static LinearMap block_diag(std::vector<Mat> blocks) {
    require(!blocks.empty(), "shape", "empty block diagonal");
    LinearMap op;
    op.layout_ = Layout::BlockDiag;
    for (const auto& b : blocks) {
      op.rows_ += b.rows();
      op.cols_ += b.cols();
    }
    op.blocks_ = std::move(blocks);
    op.index();
    return op;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Layout layout() const { return layout_; }
  const std::vector<Mat>& blocks() const { return blocks_; }
  Index col_offset(std::size_t i) const { return col_off_[i]; }

  std::optional<double> norm_sq() const { return norm_sq_; }
  LinearMap with_norm_sq(double v) const {
    LinearMap op = *this;
    op.norm_sq_ = v;
    return op;
  }

  Vec apply(const Vec& x) const {
    require(x.size() == cols_, "shape", "apply: length(x) != cols");
    Vec y = Vec::Zero(rows_);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Mat& a = blocks_[i];
      auto out = y.segment(row_off_[i], a.rows());
      for (Index j = 0; j < a.cols(); ++j) out += x[col_off_[i] + j] * a.col(j);
    }
    return y;
  }

  Vec adjoint_apply(const Vec& y) const {
    require(y.size() == rows_, "shape", "adjoint_apply: length(y) != rows");
    Vec x(cols_);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Mat& a = blocks_[i];
      auto in = y.segment(row_off_[i], a.rows());
      for (Index j = 0; j < a.cols(); ++j) x[col_off_[i] + j] = a.col(j).dot(in);
    }
    return x;
  }

  Mat to_dense() const {
    Mat d = Mat::Zero(rows_, cols_);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      d.block(row_off_[i], col_off_[i], blocks_[i].rows(), blocks_[i].cols()) = blocks_[i];
    return d;
  }

  bool is_zero() const {
    for (const auto& b : blocks_)
      if (b.size() > 0 && b.cwiseAbs().maxCoeff() > 0) return false;
    return true;
  }

 private:
  void index() {
    Index r = 0, c = 0;
    for (const auto& b : blocks_) {
      row_off_.push_back(layout_ == Layout::BlockDiag ? r : 0);
      col_off_.push_back(c);
      r += b.rows();
      c += b.cols();
    }
  }

  Layout layout_ = Layout::Dense;
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Mat> blocks_;
  std::vector<Index> row_off_;
  std::vector<Index> col_off_;
  std::optional<double> norm_sq_;
};

inline constexpr double kNormSafety = 1.01;

/// Power-method estimate of lambda_max(A^T A), times kNormSafety.
/// Starts from the normalized all-ones vector; returns 0 for the zero map.
inline double spectral_norm_sq(const LinearMap& op, double tol = 1e-12, int max_iter = 20000) {
  if (op.cols() == 0 || op.rows() == 0 || op.is_zero()) return 0.0;
  const Index n = op.cols();
  Vec v = Vec::Ones(n) / std::sqrt(double(n));

  // ||A e_j||^2 is a lower bound on lambda_max; it also rescues starts that
  // happen to be orthogonal to the dominant eigenvector.
  double col_best = 0.0;
  Index col_arg = 0;
  for (std::size_t i = 0; i < op.blocks().size(); ++i) {
    const Mat& a = op.blocks()[i];
    for (Index j = 0; j < a.cols(); ++j) {
      double c = a.col(j).squaredNorm();
      if (c > col_best) {
        col_best = c;
        col_arg = op.col_offset(i) + j;
      }
    }
  }
  if (op.apply(v).squaredNorm() <= 1e-14 * col_best) {
    v.setZero();
    v[col_arg] = 1.0;
  }

  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec av = op.apply(v);
    double next = av.squaredNorm();
    Vec w = op.adjoint_apply(av);
    double wn = w.norm();
    if (wn == 0.0) return kNormSafety * std::max(next, col_best);
    v = w / wn;
    if (it > 0 && std::abs(next - est) <= tol * next) {
      // Rayleigh quotient of the updated vector is a slightly better estimate
      double last = op.apply(v).squaredNorm();
      return kNormSafety * std::max({last, next, col_best});
    }
    est = next;
  }
  throw Error("norm-estimate", "power method did not converge", kNormSafety * est);
}

/// Smallest eigenvalue of A^T A by a dense symmetric eigensolve.
inline double min_eig_gram(const LinearMap& op, Index cap = 2000) {
  if (op.cols() > cap) throw Error("too-large", "min_eig_gram: cols exceed cap");
  Mat a = op.to_dense();
  Eigen::SelfAdjointEigenSolver<Mat> es(a.transpose() * a, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues()[0]);
}

}  // namespace exgap
