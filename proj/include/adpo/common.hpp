#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file common.hpp
 * @brief Shared aliases and error types for the adpo library.
 */

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace adpo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Malformed arguments: dimension mismatch, out-of-range index, bad config.
/// CLI maps this to exit code 2.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A subset index was used whose point carries no preferential feedback.
struct FeedbackMissing : InvalidInput {
  using InvalidInput::InvalidInput;
};

/// A caller broke an API contract, e.g. querying feedback twice for one id.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Optimization produced a non-finite value or an unsolvable system.
/// Carries the iteration at which the failure was detected.
/// CLI maps this to exit code 3.
struct NumericalFailure : std::runtime_error {
  NumericalFailure(const std::string& what, int iteration)
      : std::runtime_error(what), iteration(iteration) {}
  int iteration = 0;
};

}  // namespace adpo
