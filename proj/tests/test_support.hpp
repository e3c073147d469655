#pragma once

// SPDX-License-Identifier: Apache-2.0

// Test-only oracles and instance builders. The finite-difference and dense
// linear-algebra routines here are deliberately independent of the library
// code paths they check.

#include "adpo/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace adpo::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline Vector random_vector(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> unit(0.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * unit(rng);
  return v;
}

/// Random dataset with feedback drawn from a random ground-truth policy.
inline PreferenceDataset random_dataset(std::mt19937_64& rng, int n, int d,
                                        double phi_scale = 1.0,
                                        double bias_scale = 0.5) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const Vector truth = random_vector(rng, d, 0.5);
  PreferenceDataset dataset;
  dataset.dim = d;
  dataset.points.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& p = dataset.points[i];
    p.id = i;
    p.phi = random_vector(rng, d, phi_scale);
    p.bias = bias_scale * random_vector(rng, 1, 1.0)[0];
    p.feedback = coin(rng) < sigmoid(p.phi.dot(truth) - p.bias) ? 1 : 0;
  }
  return dataset;
}

inline std::vector<int> all_indices(int n) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

// ============================================================================
// Finite-difference oracles
// ============================================================================

inline Vector fd_gradient(const PreferenceDataset& dataset,
                          const std::vector<int>& subset, const Policy& policy,
                          double beta, double step = 1e-5) {
  const int d = static_cast<int>(policy.theta.size());
  Vector g(d);
  for (int k = 0; k < d; ++k) {
    Policy up = policy, down = policy;
    up.theta[k] += step;
    down.theta[k] -= step;
    g[k] = (negloglik(dataset, subset, up, beta) -
            negloglik(dataset, subset, down, beta)) /
           (2.0 * step);
  }
  return g;
}

inline Matrix fd_hessian(const PreferenceDataset& dataset,
                         const std::vector<int>& subset, const Policy& policy,
                         double beta, double step = 1e-5) {
  const int d = static_cast<int>(policy.theta.size());
  Matrix h(d, d);
  for (int k = 0; k < d; ++k) {
    Policy up = policy, down = policy;
    up.theta[k] += step;
    down.theta[k] -= step;
    h.col(k) = (gradient(dataset, subset, up, beta) -
                gradient(dataset, subset, down, beta)) /
               (2.0 * step);
  }
  return h;
}

// ============================================================================
// Dense linear-algebra oracles
// ============================================================================

inline double dense_logdet(const Matrix& m) {
  const Eigen::PartialPivLU<Matrix> lu(m);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    logdet += std::log(std::abs(lu.matrixLU()(i, i)));
  return logdet;
}

inline Matrix dense_inverse(const Matrix& m) {
  return m.fullPivLu().inverse();
}

inline double min_eigenvalue(const Matrix& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  return eig.eigenvalues().minCoeff();
}

}  // namespace adpo::testing
