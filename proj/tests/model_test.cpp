// SPDX-License-Identifier: Apache-2.0

#include "adpo/model.hpp"

#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace adpo;
namespace ts = adpo::testing;

namespace {

PreferencePoint make_point(Vector phi, double bias,
                           std::optional<int> feedback = {}) {
  PreferencePoint p;
  p.phi = std::move(phi);
  p.bias = bias;
  p.feedback = feedback;
  return p;
}

}  // namespace

TEST_CASE("preference_prob at zero logit") {
  Policy policy{Vector::Constant(3, 0.7)};

  SUBCASE("zero feature difference") {
    const auto p = make_point(Vector::Zero(3), 0.0);
    CHECK(preference_prob(p, policy, 1.0) == 0.5);
  }
  SUBCASE("bias cancels the projection") {
    auto rng = ts::make_rng(11);
    const Vector phi = ts::random_vector(rng, 3);
    const auto p = make_point(phi, phi.dot(policy.theta));
    CHECK(preference_prob(p, policy, 1.0) == 0.5);
    CHECK(preference_prob(p, policy, 2.5) == 0.5);
  }
}

TEST_CASE("preference_prob matches the closed form") {
  Policy policy{Vector::Zero(2)};
  policy.theta[0] = 1.0;
  const auto p = make_point(Vector::Unit(2, 0), 0.0);
  CHECK(preference_prob(p, policy, 1.0) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(preference_prob(p, policy, 1.0) == doctest::Approx(0.731058).epsilon(1e-5));
}

TEST_CASE("preference_prob stays in (0,1) and is antisymmetric in the logit") {
  auto rng = ts::make_rng(12);
  // Doubles cannot represent a probability strictly inside (0,1) once the
  // logit passes ~37, so probe openness on the representable range and
  // stability out to the extremes separately.
  std::uniform_real_distribution<double> logit_range(-30.0, 30.0);
  const auto plus = make_point(Vector::Ones(1), 0.0);
  const auto minus = make_point(-Vector::Ones(1), 0.0);
  for (int trial = 0; trial < 2000; ++trial) {
    Policy policy{Vector::Constant(1, logit_range(rng))};
    const double p = preference_prob(plus, policy, 1.0);
    const double q = preference_prob(minus, policy, 1.0);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(p + q == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (const double extreme : {-700.0, -37.0, 37.0, 700.0}) {
    Policy policy{Vector::Constant(1, extreme)};
    const double p = preference_prob(plus, policy, 1.0);
    CHECK(std::isfinite(p));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("preference_prob rejects mismatched dimensions") {
  Policy policy{Vector::Zero(3)};
  const auto p = make_point(Vector::Zero(4), 0.0);
  CHECK_THROWS_AS(preference_prob(p, policy, 1.0), InvalidInput);
}

TEST_CASE("negloglik basics") {
  auto rng = ts::make_rng(21);
  auto dataset = ts::random_dataset(rng, 8, 3);
  Policy policy{ts::random_vector(rng, 3)};

  SUBCASE("empty subset sums to zero") {
    CHECK(negloglik(dataset, std::vector<int>{}, policy, 1.0) == 0.0);
  }
  SUBCASE("a coin-flip point costs ln 2") {
    PreferenceDataset one;
    one.dim = 3;
    one.points.push_back(make_point(Vector::Zero(3), 0.0, 1));
    one.points[0].id = 0;
    CHECK(negloglik(one, std::vector<int>{0}, policy, 1.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("s=1 at logit z costs the same as s=0 at logit -z") {
    PreferenceDataset two;
    two.dim = 3;
    const Vector phi = ts::random_vector(rng, 3);
    two.points.push_back(make_point(phi, 0.3, 1));
    two.points.push_back(make_point(-phi, -0.3, 0));
    two.points[0].id = 0;
    two.points[1].id = 1;
    const double a = negloglik(two, std::vector<int>{0}, policy, 1.3);
    const double b = negloglik(two, std::vector<int>{1}, policy, 1.3);
    CHECK(a == b);
  }
  SUBCASE("missing feedback is reported") {
    dataset.points[2].feedback.reset();
    CHECK_THROWS_AS(negloglik(dataset, std::vector<int>{1, 2}, policy, 1.0),
                    FeedbackMissing);
  }
}

TEST_CASE("negloglik is finite at extreme logits") {
  PreferenceDataset one;
  one.dim = 1;
  one.points.push_back(make_point(Vector::Ones(1), 0.0, 0));
  one.points[0].id = 0;
  Policy policy{Vector::Constant(1, 700.0)};
  const double loss = negloglik(one, std::vector<int>{0}, policy, 1.0);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(700.0).epsilon(1e-12));
}

TEST_CASE("gradient closed forms") {
  auto rng = ts::make_rng(31);
  Policy policy{ts::random_vector(rng, 3)};

  SUBCASE("empty subset") {
    auto dataset = ts::random_dataset(rng, 4, 3);
    CHECK(gradient(dataset, std::vector<int>{}, policy, 2.0).isZero(0.0));
  }
  SUBCASE("single point") {
    PreferenceDataset one;
    one.dim = 3;
    one.points.push_back(make_point(ts::random_vector(rng, 3), 0.4, 1));
    one.points[0].id = 0;
    const double beta = 1.7;
    const double mu = preference_prob(one.points[0], policy, beta);
    const Vector expected = beta * (mu - 1.0) * one.points[0].phi;
    const Vector got = gradient(one, std::vector<int>{0}, policy, beta);
    CHECK((got - expected).norm() == 0.0);
  }
}

TEST_CASE("gradient matches central finite differences") {
  auto rng = ts::make_rng(32);
  const auto dataset = ts::random_dataset(rng, 20, 6);
  const auto subset = ts::all_indices(20);
  for (const double beta : {0.5, 1.0, 2.0}) {
    Policy policy{ts::random_vector(rng, 6, 0.6)};
    const Vector g = gradient(dataset, subset, policy, beta);
    const Vector fd = ts::fd_gradient(dataset, subset, policy, beta);
    CHECK((g - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("hessian closed forms and finite differences") {
  auto rng = ts::make_rng(33);
  Policy policy{ts::random_vector(rng, 4, 0.5)};

  SUBCASE("empty subset") {
    auto dataset = ts::random_dataset(rng, 4, 4);
    CHECK(hessian(dataset, std::vector<int>{}, policy, 1.0).isZero(0.0));
  }
  SUBCASE("single point is a scaled outer product") {
    PreferenceDataset one;
    one.dim = 4;
    one.points.push_back(make_point(ts::random_vector(rng, 4), 0.1));
    one.points[0].id = 0;
    const double beta = 2.0;
    const double w = logit_weight(one.points[0], policy, beta);
    const Matrix expected =
        w * one.points[0].phi * one.points[0].phi.transpose();
    const Matrix got = hessian(one, std::vector<int>{0}, policy, beta);
    CHECK((got - expected).norm() <= 1e-14 * std::max(1.0, expected.norm()));
    // Rank at most one.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(got);
    CHECK(eig.eigenvalues().head(3).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("matches finite differences of the gradient, symmetric PSD") {
    const auto dataset = ts::random_dataset(rng, 15, 4);
    const auto subset = ts::all_indices(15);
    const double beta = 1.5;
    const Matrix h = hessian(dataset, subset, policy, beta);
    const Matrix fd = ts::fd_hessian(dataset, subset, policy, beta);
    CHECK((h - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    CHECK((h - h.transpose()).norm() == 0.0);
    CHECK(ts::min_eigenvalue(h) >= -1e-10);
  }
}

TEST_CASE("hessian ignores feedback") {
  auto rng = ts::make_rng(34);
  auto dataset = ts::random_dataset(rng, 6, 3);
  for (auto& p : dataset.points) p.feedback.reset();
  Policy policy{ts::random_vector(rng, 3)};
  CHECK_NOTHROW(hessian(dataset, ts::all_indices(6), policy, 1.0));
}

TEST_CASE("logit_weight values and bound") {
  Policy policy{Vector::Zero(2)};
  const auto zero = make_point(Vector::Zero(2), 0.0);
  CHECK(logit_weight(zero, policy, 1.0) == 0.25);
  CHECK(logit_weight(zero, policy, 2.0) == 1.0);

  Policy four{Vector::Zero(1)};
  four.theta[0] = 4.0;
  const auto unit = make_point(Vector::Ones(1), 0.0);
  CHECK(logit_weight(unit, four, 1.0) == doctest::Approx(0.017663).epsilon(1e-4));

  auto rng = ts::make_rng(35);
  std::uniform_real_distribution<double> logit_range(-50.0, 50.0);
  std::uniform_real_distribution<double> beta_range(0.1, 5.0);
  for (int trial = 0; trial < 20000; ++trial) {
    const double beta = beta_range(rng);
    Policy p{Vector::Constant(1, logit_range(rng))};
    CHECK(logit_weight(unit, p, beta) <= 0.25 * beta * beta);
  }
}

TEST_CASE("negloglik is convex along line segments") {
  auto rng = ts::make_rng(36);
  const auto dataset = ts::random_dataset(rng, 12, 5);
  const auto subset = ts::all_indices(12);
  std::uniform_real_distribution<double> mix(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Policy a{ts::random_vector(rng, 5)};
    const Policy b{ts::random_vector(rng, 5)};
    const double lambda = mix(rng);
    const Policy middle{lambda * a.theta + (1.0 - lambda) * b.theta};
    const double lhs = negloglik(dataset, subset, middle, 1.2);
    const double rhs = lambda * negloglik(dataset, subset, a, 1.2) +
                       (1.0 - lambda) * negloglik(dataset, subset, b, 1.2);
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("normalize_to_unit_bounds") {
  auto rng = ts::make_rng(37);
  auto dataset = ts::random_dataset(rng, 10, 4, 3.0, 4.0);
  const auto normalized = normalize_to_unit_bounds(dataset);
  double max_norm = 0.0;
  for (const auto& p : normalized.points) {
    max_norm = std::max(max_norm, p.phi.norm());
    CHECK(std::abs(p.bias) <= 1.0);
  }
  CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-12));
  // Directions are preserved.
  CHECK(normalized.points[0].phi.normalized().dot(
            dataset.points[0].phi.normalized()) == doctest::Approx(1.0));
}

TEST_CASE("dataset validation") {
  auto rng = ts::make_rng(38);
  auto dataset = ts::random_dataset(rng, 5, 3);
  CHECK_NOTHROW(dataset.validate());
  dataset.points[3].id = 7;
  CHECK_THROWS_AS(dataset.validate(), InvalidInput);
}
