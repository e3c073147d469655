#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file design.hpp
 * @brief Regularized design matrix with an incrementally maintained inverse.
 *
 * DesignState holds H = gamma*I + sum v v^T together with H^-1, updated in
 * O(d^2) per rank-one addition via the Sherman-Morrison identity. Candidate
 * scoring uses the variance form v^T H^-1 v; the log-determinant gain
 * log det(H + vv^T) - log det(H) equals log(1 + variance) and is exposed
 * for diagnostics, never for acquisition (both rank candidates identically
 * because log(1+x) is strictly increasing).
 */

#include "adpo/common.hpp"

#include <cmath>

namespace adpo {

class DesignState {
 public:
  /// H = gamma * I, inverse = I / gamma.
  DesignState(int dim, double gamma) : dim_(dim), gamma_(gamma) {
    if (dim < 1) throw InvalidInput("DesignState: dim must be >= 1");
    if (!(gamma > 0.0)) throw InvalidInput("DesignState: gamma must be > 0");
    h_ = Matrix::Identity(dim, dim) * gamma;
    h_inv_ = Matrix::Identity(dim, dim) / gamma;
  }

  int dim() const { return dim_; }
  double gamma() const { return gamma_; }
  long count() const { return count_; }
  const Matrix& matrix() const { return h_; }
  const Matrix& inverse() const { return h_inv_; }

  /// v^T H^-1 v, the predictive variance of direction v.
  double variance(const Vector& v) const {
    check_dim(v);
    return v.dot(h_inv_ * v);
  }

  /// log det(H + vv^T) - log det(H) = log(1 + v^T H^-1 v).
  double logdet_gain(const Vector& v) const { return std::log1p(variance(v)); }

  /// Adds vv^T to H and applies the matching Sherman-Morrison downdate to
  /// the inverse. Every 1000 updates the inverse is recomputed from H to
  /// cap accumulated drift.
  void update(const Vector& v) {
    check_dim(v);
    h_.selfadjointView<Eigen::Lower>().rankUpdate(v);
    h_.triangularView<Eigen::StrictlyUpper>() = h_.transpose();
    const Vector w = h_inv_ * v;
    h_inv_.noalias() -= (w * w.transpose()) / (1.0 + v.dot(w));
    ++count_;
    if (count_ % kReinvertEvery == 0) reinvert();
  }

  /// Recomputes the inverse from H by Cholesky factorization.
  void reinvert() {
    Eigen::LLT<Matrix> llt(h_);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("DesignState: H lost positive definiteness",
                             static_cast<int>(count_));
    h_inv_ = llt.solve(Matrix::Identity(dim_, dim_));
  }

 private:
  static constexpr long kReinvertEvery = 1000;

  void check_dim(const Vector& v) const {
    if (v.size() != dim_) throw InvalidInput("DesignState: dimension mismatch");
  }

  int dim_;
  double gamma_;
  long count_ = 0;
  Matrix h_;
  Matrix h_inv_;
};

}  // namespace adpo
