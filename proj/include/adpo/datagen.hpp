#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file datagen.hpp
 * @brief Synthetic preferential-feedback dataset construction.
 *
 * The pipeline turns a matrix of feature-difference rows into a complete
 * preference dataset with simulated feedback and ground truth:
 *
 *   1. fit a ridge logistic model theta_bar (with covariance sigma_bar) to
 *      the rows, all labeled 1, to act as the feedback simulator
 *   2. draw feedback s_i ~ Bernoulli(sigmoid(phi_i . theta_bar))
 *   3. draw a reference parameter theta_ref ~ N(theta_bar, sigma_bar) and
 *      set each bias to phi_i . theta_ref
 *   4. fit the oracle policy theta_star on the full labeled dataset
 *
 * Rows come either from differences of class-conditional feature vectors
 * (build_pairs_from_classes), from a self-contained Gaussian two-cluster
 * generator (gaussian_phi), or from an external file of embedding rows.
 * Everything is a pure function of the inputs and the seed.
 */

#include "adpo/common.hpp"
#include "adpo/model.hpp"
#include "adpo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace adpo {

enum class GeneratorMode { kClassFeatures, kGaussian };

struct GeneratorSpec {
  GeneratorMode mode = GeneratorMode::kGaussian;
  int n_points = 8192;
  int dim = 32;
  std::optional<int> positive_label;  // class mode; random when absent
  double feature_ridge = 1e-3;        // ridge for the simulator fit
  double beta = 1.0;                  // preference scale for the oracle fit
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (n_points < 1) throw InvalidInput("GeneratorSpec: n_points must be >= 1");
    if (dim < 1) throw InvalidInput("GeneratorSpec: dim must be >= 1");
    if (!(feature_ridge > 0.0))
      throw InvalidInput("GeneratorSpec: feature_ridge must be > 0");
    if (!(beta > 0.0)) throw InvalidInput("GeneratorSpec: beta must be > 0");
  }
};

struct GroundTruth {
  Vector theta_bar;   // feedback simulator parameter
  Matrix sigma_bar;   // its covariance
  Vector theta_ref;   // reference parameter defining the biases
  Policy theta_star;  // oracle policy fit on the full dataset
};

/// Difference rows between randomly drawn positive and negative examples of
/// a labeled feature matrix, sampled with replacement.
inline Matrix build_pairs_from_classes(const Matrix& features,
                                       const std::vector<int>& labels,
                                       const GeneratorSpec& spec) {
  spec.validate();
  if (features.rows() != static_cast<Eigen::Index>(labels.size()))
    throw InvalidInput("build_pairs_from_classes: features/labels mismatch");
  if (features.rows() == 0)
    throw InvalidInput("build_pairs_from_classes: empty feature matrix");

  std::mt19937_64 rng(spec.rng_seed);
  int positive;
  if (spec.positive_label) {
    positive = *spec.positive_label;
  } else {
    std::vector<int> distinct(labels);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    std::uniform_int_distribution<size_t> pick(0, distinct.size() - 1);
    positive = distinct[pick(rng)];
  }

  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    (labels[i] == positive ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw InvalidInput("build_pairs_from_classes: label " +
                       std::to_string(positive) +
                       " needs at least one positive and one negative example");

  Matrix rows(spec.n_points, features.cols());
  std::uniform_int_distribution<size_t> pick_pos(0, pos.size() - 1);
  std::uniform_int_distribution<size_t> pick_neg(0, neg.size() - 1);
  for (int i = 0; i < spec.n_points; ++i)
    rows.row(i) = features.row(pos[pick_pos(rng)]) -
                  features.row(neg[pick_neg(rng)]);
  return rows;
}

/// Self-contained stand-in for embedding differences: one positive and one
/// negative cluster center, anisotropic per-coordinate noise with a
/// decaying scale profile, rows rescaled so the largest norm is exactly 1.
inline Matrix gaussian_phi(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  Vector center_pos(spec.dim), center_neg(spec.dim), scales(spec.dim);
  for (int k = 0; k < spec.dim; ++k) center_pos[k] = unit(rng);
  for (int k = 0; k < spec.dim; ++k) center_neg[k] = unit(rng);
  for (int k = 0; k < spec.dim; ++k) scales[k] = 1.0 / std::sqrt(1.0 + k);

  Matrix rows(spec.n_points, spec.dim);
  for (int i = 0; i < spec.n_points; ++i)
    for (int k = 0; k < spec.dim; ++k) {
      const double positive = center_pos[k] + scales[k] * unit(rng);
      const double negative = center_neg[k] + scales[k] * unit(rng);
      rows(i, k) = positive - negative;
    }

  const double max_norm = rows.rowwise().norm().maxCoeff();
  if (max_norm > 0.0) rows /= max_norm;
  return rows;
}

/// Oracle policy: full-data fit with every point's feedback.
inline Policy oracle_policy(const PreferenceDataset& dataset,
                            const ModelConfig& config,
                            const FitOptions& options) {
  if (!dataset.all_feedback_present())
    throw FeedbackMissing("oracle_policy: dataset has points without feedback");
  std::vector<int> all(dataset.size());
  std::iota(all.begin(), all.end(), 0);
  return fit_dpo(dataset, all, config, options).policy;
}

/// Runs steps 1..4 of the pipeline on prepared feature-difference rows.
inline std::pair<PreferenceDataset, GroundTruth> synthesize_dataset(
    const Matrix& phi_rows, const GeneratorSpec& spec) {
  spec.validate();
  if (phi_rows.rows() == 0)
    throw InvalidInput("synthesize_dataset: no feature rows");
  const auto n = phi_rows.rows();
  const auto d = phi_rows.cols();

  // Simulator fit: every row labeled 1, ridge keeps the optimum finite.
  const LogisticFit simulator = fit_logistic(
      phi_rows, std::vector<int>(n, 1), spec.feature_ridge);

  GroundTruth truth;
  truth.theta_bar = simulator.theta;
  truth.sigma_bar = simulator.covariance;

  std::mt19937_64 rng(spec.rng_seed + 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> unit(0.0, 1.0);

  PreferenceDataset dataset;
  dataset.dim = static_cast<int>(d);
  dataset.points.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& p = dataset.points[i];
    p.id = static_cast<int>(i);
    p.phi = phi_rows.row(i).transpose();
    p.feedback = coin(rng) < sigmoid(p.phi.dot(truth.theta_bar)) ? 1 : 0;
  }

  // Reference parameter via the symmetric square root of the covariance.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(truth.sigma_bar);
  if (eig.info() != Eigen::Success)
    throw NumericalFailure("synthesize_dataset: covariance eigensolver failed",
                           0);
  const Matrix root = eig.eigenvectors() *
                      eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                      eig.eigenvectors().transpose();
  Vector z(d);
  for (Eigen::Index k = 0; k < d; ++k) z[k] = unit(rng);
  truth.theta_ref = truth.theta_bar + root * z;

  for (auto& p : dataset.points) p.bias = p.phi.dot(truth.theta_ref);

  ModelConfig config;
  config.beta = spec.beta;
  truth.theta_star = oracle_policy(dataset, config, FitOptions{});
  return {std::move(dataset), std::move(truth)};
}

}  // namespace adpo
