#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file solver.hpp
 * @brief Maximum-likelihood fitting of preference policies.
 *
 * fit_dpo minimizes negloglik + (ridge/2)||theta||^2 with a damped Newton
 * method (exact Hessian, Armijo backtracking, gradient fallback when the
 * Newton system is unreliable). An optional norm constraint projects each
 * iterate onto a ball; convergence is then measured by the projected
 * gradient norm.
 *
 * fit_logistic is a standalone ridge-regularized logistic regression used
 * by the data generator; it deliberately does not share the fit_dpo code
 * path so the two can cross-check each other.
 */

#include "adpo/common.hpp"
#include "adpo/model.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace adpo {

struct FitOptions {
  int max_iters = 500;
  double grad_tol = 1e-8;
  double ridge = 1e-6;
  std::optional<double> constraint_radius;  // unit-ball theory mode when 1

  void validate() const {
    if (max_iters < 1) throw InvalidInput("FitOptions: max_iters must be >= 1");
    if (!(grad_tol > 0.0)) throw InvalidInput("FitOptions: grad_tol must be > 0");
    if (!(ridge >= 0.0)) throw InvalidInput("FitOptions: ridge must be >= 0");
    if (constraint_radius && !(*constraint_radius > 0.0))
      throw InvalidInput("FitOptions: constraint_radius must be > 0");
  }
};

struct FitReport {
  Policy policy;
  int iterations = 0;
  double final_grad_norm = 0.0;
  double final_negloglik = 0.0;  // unpenalized negloglik at the solution
  bool converged = false;
  bool projected = false;  // the norm constraint was active at some step
};

/// theta unchanged if ||theta|| <= radius, else rescaled onto the sphere.
inline Vector project_to_ball(Vector theta, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("project_to_ball: radius must be > 0");
  const double norm = theta.norm();
  if (norm > radius) theta *= radius / norm;
  return theta;
}

namespace detail {

/// Newton direction for g with curvature h + ridge*I. Falls back to the
/// negative gradient when the factorization fails or the direction is not
/// a descent direction.
inline Vector descent_direction(const Matrix& h, const Vector& g,
                                double ridge) {
  Matrix damped = h;
  damped.diagonal().array() += ridge + 1e-12;
  Eigen::LDLT<Matrix> ldlt(damped);
  if (ldlt.info() == Eigen::Success) {
    Vector dir = ldlt.solve(-g);
    if (dir.allFinite() && g.dot(dir) < 0.0) return dir;
  }
  return -g;
}

}  // namespace detail

/// Fits the preference model on `subset` by damped Newton descent.
///
/// Starts from `init` (zero vector by default), optionally projecting every
/// iterate onto ||theta|| <= constraint_radius. Throws NumericalFailure if
/// the objective turns non-finite.
inline FitReport fit_dpo(const PreferenceDataset& dataset,
                         std::span<const int> subset, const ModelConfig& config,
                         const FitOptions& options,
                         const std::optional<Policy>& init = {}) {
  config.validate();
  options.validate();
  if (subset.empty()) throw InvalidInput("fit_dpo: subset must be nonempty");

  const double beta = config.beta;
  const double ridge = options.ridge;
  const std::optional<double> radius = options.constraint_radius;

  Policy policy{init ? init->theta : Vector::Zero(dataset.dim)};
  if (policy.theta.size() != dataset.dim)
    throw InvalidInput("fit_dpo: init dimension mismatch");
  if (radius) policy.theta = project_to_ball(policy.theta, *radius);

  auto objective = [&](const Policy& p) {
    return negloglik(dataset, subset, p, beta) +
           0.5 * ridge * p.theta.squaredNorm();
  };

  // Projected gradient norm in constrained mode, plain norm otherwise.
  auto stationarity = [&](const Policy& p, const Vector& g) {
    if (!radius) return g.norm();
    return (p.theta - project_to_ball(p.theta - g, *radius)).norm();
  };

  FitReport report;
  double f = objective(policy);
  if (!std::isfinite(f))
    throw NumericalFailure("fit_dpo: objective not finite at init", 0);

  int iter = 0;
  Vector g;
  double res = 0.0;
  for (; iter < options.max_iters; ++iter) {
    g = gradient(dataset, subset, policy, beta) + ridge * policy.theta;
    res = stationarity(policy, g);
    if (res <= options.grad_tol) {
      report.converged = true;
      break;
    }

    const Matrix h = hessian(dataset, subset, policy, beta);

    // Armijo backtracking by halving; the sufficient-decrease test uses the
    // actual move so it remains valid when the trial point is projected.
    // If the Newton direction yields no acceptable step, retry along -g.
    constexpr double kArmijo = 1e-4;
    bool accepted = false;
    for (const Vector& dir :
         {detail::descent_direction(h, g, ridge), Vector(-g)}) {
      double step = 1.0;
      for (int halving = 0; halving < 60; ++halving) {
        Vector raw = policy.theta + step * dir;
        Policy trial{radius ? project_to_ball(raw, *radius) : std::move(raw)};
        const double f_trial = objective(trial);
        if (!std::isfinite(f_trial))
          throw NumericalFailure("fit_dpo: objective not finite", iter);
        const double predicted = g.dot(trial.theta - policy.theta);
        if (f_trial <= f + kArmijo * predicted && predicted < 0.0) {
          if (radius && trial.theta.norm() >= *radius * (1.0 - 1e-12))
            report.projected = true;
          policy = std::move(trial);
          f = f_trial;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (accepted) break;
    }
    if (!accepted) {
      // No acceptable step in either direction; report the current point.
      break;
    }
  }

  if (!report.converged) {
    g = gradient(dataset, subset, policy, beta) + ridge * policy.theta;
    res = stationarity(policy, g);
    report.converged = res <= options.grad_tol;
  }
  report.policy = policy;
  report.iterations = iter;
  report.final_grad_norm = res;
  report.final_negloglik = negloglik(dataset, subset, policy, beta);
  return report;
}

struct LogisticFit {
  Vector theta;       // ridge-regularized MLE
  Matrix covariance;  // (hessian at theta + ridge*I)^-1
};

/// Ridge-regularized logistic regression by Newton iterations on the full
/// feature matrix. Labels are 0/1. Returns the estimate and its asymptotic
/// covariance.
inline LogisticFit fit_logistic(const Matrix& features,
                                const std::vector<int>& labels, double ridge,
                                int max_iters = 200, double grad_tol = 1e-10) {
  const auto n = features.rows();
  const auto d = features.cols();
  if (n < 1) throw InvalidInput("fit_logistic: need at least one row");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw InvalidInput("fit_logistic: labels/features size mismatch");
  if (!(ridge > 0.0)) throw InvalidInput("fit_logistic: ridge must be > 0");

  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw InvalidInput("fit_logistic: labels must be 0 or 1");
    y[i] = labels[i];
  }

  Vector theta = Vector::Zero(d);
  Vector z(n), mu(n), w(n);

  auto objective = [&](const Vector& t) {
    const Vector zz = features * t;
    double f = 0.5 * ridge * t.squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i)
      f += y[i] == 1.0 ? softplus(-zz[i]) : softplus(zz[i]);
    return f;
  };

  double f = objective(theta);
  for (int iter = 0; iter < max_iters; ++iter) {
    z = features * theta;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = sigmoid(z[i]);
      w[i] = std::sqrt(sigmoid_weight(z[i]));
    }
    const Vector g = features.transpose() * (mu - y) + ridge * theta;
    if (g.norm() <= grad_tol) break;

    Matrix h = Matrix::Zero(d, d);
    h.selfadjointView<Eigen::Lower>().rankUpdate(
        (features.array().colwise() * w.array()).matrix().transpose());
    h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
    h.diagonal().array() += ridge;

    Eigen::LDLT<Matrix> ldlt(h);
    if (ldlt.info() != Eigen::Success)
      throw NumericalFailure("fit_logistic: Newton system not solvable", iter);
    Vector dir = ldlt.solve(-g);
    if (!dir.allFinite())
      throw NumericalFailure("fit_logistic: Newton system not solvable", iter);

    double step = 1.0;
    for (int halving = 0; halving < 60; ++halving) {
      const Vector trial = theta + step * dir;
      const double f_trial = objective(trial);
      if (f_trial <= f + 1e-4 * step * g.dot(dir)) {
        theta = trial;
        f = f_trial;
        break;
      }
      step *= 0.5;
    }
  }

  // Curvature at the solution, ridge-stabilized, inverted for the covariance.
  z = features * theta;
  for (Eigen::Index i = 0; i < n; ++i) w[i] = std::sqrt(sigmoid_weight(z[i]));
  Matrix h = Matrix::Zero(d, d);
  h.selfadjointView<Eigen::Lower>().rankUpdate(
      (features.array().colwise() * w.array()).matrix().transpose());
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  h.diagonal().array() += ridge;

  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("fit_logistic: covariance not positive definite",
                           max_iters);
  return LogisticFit{theta, llt.solve(Matrix::Identity(d, d))};
}

}  // namespace adpo
