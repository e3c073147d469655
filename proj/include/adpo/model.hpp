#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file model.hpp
 * @brief Preference probability model for log-linear policies.
 *
 * A data point i carries a feature difference phi_i (between the two
 * candidate responses), a reference-policy bias b_i, and optional binary
 * feedback s_i. Under a log-linear policy theta the probability that the
 * first response is preferred is
 *
 *   mu_i(theta) = sigmoid(beta * (phi_i . theta - b_i)).
 *
 * This header provides the negative log-likelihood of that model on a
 * subset of points, its gradient and Hessian, and the per-point curvature
 * weight beta^2 * mu * (1 - mu) used by the design machinery.
 */

#include "adpo/common.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace adpo {

/// One prompt with two candidate responses, reduced to its sufficient
/// statistics: the feature difference, the reference bias, and (when known)
/// the observed preference.
struct PreferencePoint {
  int id = 0;
  Vector phi;
  double bias = 0.0;
  std::optional<int> feedback;  // 1 = first response preferred, 0 = second
};

/// Log-linear policy parameter.
struct Policy {
  Vector theta;
};

/// Model-level knobs shared across fitting and selection.
struct ModelConfig {
  double beta = 1.0;   // preference-model scale, > 0
  double gamma = 1.0;  // design-matrix ridge, > 0
  double alpha = 3.0;  // optimistic-weight width, >= 0; 0 disables

  void validate() const {
    if (!(beta > 0.0)) throw InvalidInput("ModelConfig: beta must be > 0");
    if (!(gamma > 0.0)) throw InvalidInput("ModelConfig: gamma must be > 0");
    if (!(alpha >= 0.0)) throw InvalidInput("ModelConfig: alpha must be >= 0");
  }
};

/// An indexed collection of preference points sharing one feature dimension.
struct PreferenceDataset {
  std::vector<PreferencePoint> points;
  int dim = 0;

  int size() const { return static_cast<int>(points.size()); }

  /// Checks the structural invariants: ids are exactly 0..N-1 and every
  /// phi has length dim. Throws InvalidInput on violation.
  void validate() const {
    for (int i = 0; i < size(); ++i) {
      if (points[i].id != i)
        throw InvalidInput("PreferenceDataset: ids must be 0..N-1 in order");
      if (points[i].phi.size() != dim)
        throw InvalidInput("PreferenceDataset: inconsistent feature dimension");
    }
  }

  bool all_feedback_present() const {
    for (const auto& p : points)
      if (!p.feedback.has_value()) return false;
    return true;
  }
};

// ============================================================================
// Scalar primitives
// ============================================================================

/// Logistic sigmoid, branch on sign so exp never overflows.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)), stable for any z.
inline double softplus(double z) {
  const double m = z > 0.0 ? z : 0.0;
  return m + std::log1p(std::exp(-std::abs(z)));
}

/// sigmoid(z) * (1 - sigmoid(z)), evaluated at |z| so the factors are exact
/// and the result never exceeds 0.25 even in floating point.
inline double sigmoid_weight(double z) {
  const double m = sigmoid(std::abs(z));  // in [0.5, 1]
  return m * (1.0 - m);
}

// ============================================================================
// Model operations
// ============================================================================

/// Preference logit beta * (phi . theta - b).
inline double logit(const PreferencePoint& point, const Policy& policy,
                    double beta) {
  if (point.phi.size() != policy.theta.size())
    throw InvalidInput("logit: feature/parameter dimension mismatch");
  return beta * (point.phi.dot(policy.theta) - point.bias);
}

/// Probability that the first response is preferred, mu_i(theta).
inline double preference_prob(const PreferencePoint& point,
                              const Policy& policy, double beta) {
  return sigmoid(logit(point, policy, beta));
}

/// Curvature weight beta^2 * mu * (1 - mu), always in [0, 0.25 * beta^2].
inline double logit_weight(const PreferencePoint& point, const Policy& policy,
                           double beta) {
  return beta * beta * sigmoid_weight(logit(point, policy, beta));
}

namespace detail {

inline const PreferencePoint& checked_point(const PreferenceDataset& dataset,
                                            int index) {
  if (index < 0 || index >= dataset.size())
    throw InvalidInput("subset index out of range");
  return dataset.points[index];
}

inline int checked_feedback(const PreferencePoint& point) {
  if (!point.feedback.has_value())
    throw FeedbackMissing("point " + std::to_string(point.id) +
                          " has no feedback");
  return *point.feedback;
}

}  // namespace detail

/// Negative log-likelihood of the observed preferences on `subset`.
///
/// Each term is evaluated as s * softplus(-z) + (1 - s) * softplus(z),
/// the log-sum-exp form of -s log mu - (1 - s) log(1 - mu), so no
/// probability is ever passed through a bare log.
inline double negloglik(const PreferenceDataset& dataset,
                        std::span<const int> subset, const Policy& policy,
                        double beta) {
  double total = 0.0;
  for (int index : subset) {
    const auto& point = detail::checked_point(dataset, index);
    const int s = detail::checked_feedback(point);
    const double z = logit(point, policy, beta);
    total += s == 1 ? softplus(-z) : softplus(z);
  }
  return total;
}

/// Gradient of negloglik: beta * sum (mu_i - s_i) phi_i.
inline Vector gradient(const PreferenceDataset& dataset,
                       std::span<const int> subset, const Policy& policy,
                       double beta) {
  Vector g = Vector::Zero(policy.theta.size());
  for (int index : subset) {
    const auto& point = detail::checked_point(dataset, index);
    const int s = detail::checked_feedback(point);
    const double mu = preference_prob(point, policy, beta);
    g.noalias() += (beta * (mu - s)) * point.phi;
  }
  return g;
}

/// Hessian of negloglik: beta^2 * sum mu_i (1 - mu_i) phi_i phi_i^T.
/// Symmetric positive semi-definite; does not read feedback.
inline Matrix hessian(const PreferenceDataset& dataset,
                      std::span<const int> subset, const Policy& policy,
                      double beta) {
  const auto d = policy.theta.size();
  const auto n = static_cast<Eigen::Index>(subset.size());
  // Stack sqrt-weighted rows and form one symmetric rank-n update; much
  // faster than n rank-1 updates at large d.
  Matrix rows(n, d);
  Eigen::Index r = 0;
  for (int index : subset) {
    const auto& point = detail::checked_point(dataset, index);
    if (point.phi.size() != d)
      throw InvalidInput("hessian: feature/parameter dimension mismatch");
    const double w = logit_weight(point, policy, beta);
    rows.row(r++) = std::sqrt(w) * point.phi.transpose();
  }
  Matrix h = Matrix::Zero(d, d);
  h.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  return h;
}

/// Copy of `dataset` rescaled so that max ||phi|| = 1 and every |bias| <= 1.
/// Opt-in transform for reproducing the bounded-data regime; generated
/// datasets are not normalized automatically.
inline PreferenceDataset normalize_to_unit_bounds(PreferenceDataset dataset) {
  double max_norm = 0.0;
  for (const auto& p : dataset.points) max_norm = std::max(max_norm, p.phi.norm());
  if (max_norm > 0.0)
    for (auto& p : dataset.points) p.phi /= max_norm;
  for (auto& p : dataset.points)
    p.bias = std::clamp(p.bias, -1.0, 1.0);
  return dataset;
}

}  // namespace adpo
