// SPDX-License-Identifier: Apache-2.0

#include "adpo/design.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"

using namespace adpo;
namespace ts = adpo::testing;

TEST_CASE("fresh design state") {
  DesignState state(3, 2.0);
  CHECK(state.count() == 0);
  CHECK((state.matrix() - Matrix::Identity(3, 3) * 2.0).norm() == 0.0);
  CHECK((state.inverse() - Matrix::Identity(3, 3) * 0.5).norm() == 0.0);

  auto rng = ts::make_rng(61);
  const Vector v = ts::random_vector(rng, 3);
  CHECK(state.variance(v) == doctest::Approx(v.squaredNorm() / 2.0).epsilon(1e-14));
  CHECK(state.logdet_gain(v) ==
        doctest::Approx(std::log1p(v.squaredNorm() / 2.0)).epsilon(1e-14));

  CHECK_THROWS_AS(DesignState(3, 0.0), InvalidInput);
  CHECK_THROWS_AS(DesignState(0, 1.0), InvalidInput);
  CHECK_THROWS_AS(state.variance(Vector::Zero(4)), InvalidInput);
}

TEST_CASE("variance of the zero vector is zero") {
  DesignState state(4, 1.5);
  CHECK(state.variance(Vector::Zero(4)) == 0.0);
  CHECK(state.logdet_gain(Vector::Zero(4)) == 0.0);
}

TEST_CASE("scalar logdet gain") {
  DesignState state(1, 0.7);
  Vector v(1);
  v << 1.9;
  CHECK(state.logdet_gain(v) ==
        doctest::Approx(std::log(1.0 + 1.9 * 1.9 / 0.7)).epsilon(1e-14));
}

TEST_CASE("update with the zero vector only bumps the counter") {
  DesignState state(3, 1.0);
  const Matrix h_before = state.matrix();
  const Matrix inv_before = state.inverse();
  state.update(Vector::Zero(3));
  CHECK(state.count() == 1);
  CHECK((state.matrix() - h_before).norm() == 0.0);
  CHECK((state.inverse() - inv_before).norm() == 0.0);
}

TEST_CASE("updating strictly shrinks the variance of the added direction") {
  auto rng = ts::make_rng(62);
  DesignState state(5, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Vector v = ts::random_vector(rng, 5);
    const double before = state.variance(v);
    state.update(v);
    CHECK(state.variance(v) < before);
  }
}

TEST_CASE("logdet gain matches the dense determinant") {
  auto rng = ts::make_rng(63);
  DesignState state(8, 1.0);
  for (int i = 0; i < 30; ++i) state.update(ts::random_vector(rng, 8, 0.5));
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v = ts::random_vector(rng, 8);
    const double direct = ts::dense_logdet(
                              Matrix(state.matrix() + v * v.transpose())) -
                          ts::dense_logdet(state.matrix());
    CHECK(state.logdet_gain(v) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("maintained inverse tracks the dense inverse through many updates") {
  auto rng = ts::make_rng(64);
  DesignState state(32, 1.0);
  for (int i = 0; i < 500; ++i) state.update(ts::random_vector(rng, 32, 0.4));
  const Matrix direct = ts::dense_inverse(state.matrix());
  CHECK((state.inverse() - direct).norm() <= 1e-8 * direct.norm());
  CHECK(ts::min_eigenvalue(state.matrix()) >= 1.0 - 1e-9);
}

TEST_CASE("periodic reinversion keeps long runs accurate") {
  auto rng = ts::make_rng(65);
  DesignState state(8, 1.0);
  for (int i = 0; i < 1200; ++i) state.update(ts::random_vector(rng, 8, 0.3));
  const Matrix direct = ts::dense_inverse(state.matrix());
  CHECK((state.inverse() - direct).norm() <= 1e-8 * direct.norm());
}

TEST_CASE("probe variance never increases across updates") {
  auto rng = ts::make_rng(66);
  DesignState state(6, 1.0);
  std::vector<Vector> probes;
  for (int k = 0; k < 10; ++k) probes.push_back(ts::random_vector(rng, 6));
  std::vector<double> last;
  for (const auto& probe : probes) last.push_back(state.variance(probe));
  for (int i = 0; i < 100; ++i) {
    state.update(ts::random_vector(rng, 6, 0.7));
    for (size_t k = 0; k < probes.size(); ++k) {
      const double now = state.variance(probes[k]);
      CHECK(now <= last[k] + 1e-12);
      last[k] = now;
    }
  }
}

TEST_CASE("variance argmax equals dense logdet argmax over candidate sets") {
  auto rng = ts::make_rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    DesignState state(6, 1.0);
    for (int i = 0; i < 10; ++i) state.update(ts::random_vector(rng, 6, 0.5));
    std::vector<Vector> candidates;
    for (int i = 0; i < 24; ++i) candidates.push_back(ts::random_vector(rng, 6));

    int best_variance = -1, best_logdet = -1;
    double top_variance = -1.0, top_logdet = -1e300;
    const double base = ts::dense_logdet(state.matrix());
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
      const double var = state.variance(candidates[i]);
      if (var > top_variance) {
        top_variance = var;
        best_variance = i;
      }
      const double gain =
          ts::dense_logdet(Matrix(state.matrix() +
                                  candidates[i] * candidates[i].transpose())) -
          base;
      if (gain > top_logdet) {
        top_logdet = gain;
        best_logdet = i;
      }
    }
    CHECK(best_variance == best_logdet);
  }
}

TEST_CASE("determinant telescopes over the per-update gains") {
  auto rng = ts::make_rng(68);
  DesignState state(7, 1.3);
  const double logdet_start = ts::dense_logdet(state.matrix());
  double accumulated = 0.0;
  for (int i = 0; i < 60; ++i) {
    const Vector v = ts::random_vector(rng, 7, 0.6);
    accumulated += state.logdet_gain(v);
    state.update(v);
  }
  const double logdet_end = ts::dense_logdet(state.matrix());
  CHECK(logdet_end - logdet_start ==
        doctest::Approx(accumulated).epsilon(1e-8));
}
