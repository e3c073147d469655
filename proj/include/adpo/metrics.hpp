#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file metrics.hpp
 * @brief Policy-vs-policy evaluation over a preference dataset.
 *
 * All three metrics compare a fitted policy against a reference optimum
 * over the full dataset. Logit errors reduce to |phi . (theta_hat -
 * theta_star)| scaled by beta because the reference biases cancel in the
 * difference of logits; the error rate counts points whose preferred
 * response flips between the two policies (biases do not cancel there).
 */

#include "adpo/common.hpp"
#include "adpo/model.hpp"

#include <cmath>

namespace adpo {

struct MetricsReport {
  double max_logit_error = 0.0;
  double mean_logit_error = 0.0;
  double error_rate = 0.0;
  int n_used = 0;  // budget that produced theta_hat
};

namespace detail {

inline void check_metric_args(const PreferenceDataset& dataset,
                              const Policy& theta_hat,
                              const Policy& theta_star) {
  if (dataset.size() == 0) throw InvalidInput("metrics: empty dataset");
  if (theta_hat.theta.size() != dataset.dim ||
      theta_star.theta.size() != dataset.dim)
    throw InvalidInput("metrics: policy dimension mismatch");
}

inline int sign_bit(double x) { return x >= 0.0 ? 1 : -1; }  // sgn(0) = +1

}  // namespace detail

/// beta * max_i |phi_i . (theta_hat - theta_star)|.
inline double max_logit_error(const PreferenceDataset& dataset,
                              const Policy& theta_hat, const Policy& theta_star,
                              double beta) {
  detail::check_metric_args(dataset, theta_hat, theta_star);
  const Vector delta = theta_hat.theta - theta_star.theta;
  double worst = 0.0;
  for (const auto& p : dataset.points)
    worst = std::max(worst, std::abs(p.phi.dot(delta)));
  return beta * worst;
}

/// beta * mean_i |phi_i . (theta_hat - theta_star)|.
inline double mean_logit_error(const PreferenceDataset& dataset,
                               const Policy& theta_hat,
                               const Policy& theta_star, double beta) {
  detail::check_metric_args(dataset, theta_hat, theta_star);
  const Vector delta = theta_hat.theta - theta_star.theta;
  double total = 0.0;
  for (const auto& p : dataset.points) total += std::abs(p.phi.dot(delta));
  return beta * total / dataset.size();
}

/// Fraction of points where sgn(phi . theta_hat - b) differs from
/// sgn(phi . theta_star - b). Independent of beta.
inline double error_rate(const PreferenceDataset& dataset,
                         const Policy& theta_hat, const Policy& theta_star,
                         double /*beta*/ = 1.0) {
  detail::check_metric_args(dataset, theta_hat, theta_star);
  int flips = 0;
  for (const auto& p : dataset.points) {
    const int a = detail::sign_bit(p.phi.dot(theta_hat.theta) - p.bias);
    const int b = detail::sign_bit(p.phi.dot(theta_star.theta) - p.bias);
    if (a != b) ++flips;
  }
  return static_cast<double>(flips) / dataset.size();
}

inline MetricsReport evaluate(const PreferenceDataset& dataset,
                              const Policy& theta_hat, const Policy& theta_star,
                              double beta, int n_used) {
  MetricsReport report;
  report.max_logit_error = max_logit_error(dataset, theta_hat, theta_star, beta);
  report.mean_logit_error =
      mean_logit_error(dataset, theta_hat, theta_star, beta);
  report.error_rate = error_rate(dataset, theta_hat, theta_star, beta);
  report.n_used = n_used;
  return report;
}

}  // namespace adpo
