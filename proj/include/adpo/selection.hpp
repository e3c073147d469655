#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file selection.hpp
 * @brief Greedy selection of informative preference points.
 *
 * All greedy selectors share one loop shape: score every candidate in a
 * (possibly subsampled) pool of not-yet-chosen indices, take the argmax
 * with lowest-index tie-break, and update their state. They differ in the
 * score and in where the policy estimate comes from:
 *
 *   select_adpo       online; queries feedback one point per round, refits
 *                     the policy on the queried points per the refit
 *                     schedule, scores by design variance of the
 *                     curvature-weighted feature difference
 *   select_adpo_plus  offline; fits the policy once on the full dataset,
 *                     then runs the same weighted-variance greedy loop
 *   select_apo        weight-free variant; scores by design variance of
 *                     the raw feature difference
 *   select_pmc        scores by the absolute implicit reward difference
 *                     |beta * (phi . theta - b)|; queries feedback online
 *   select_uniform    seeded uniform sampling without replacement
 *
 * When alpha > 0 the curvature weight is replaced by an optimistic weight
 * computed from the logit shrunk by alpha standard deviations under the
 * design inverse (see ucb_weight); this stabilizes early rounds where the
 * policy estimate is poor.
 */

#include "adpo/common.hpp"
#include "adpo/design.hpp"
#include "adpo/model.hpp"
#include "adpo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adpo {

enum class RefitSchedule { kDoubling, kEvery, kNever };

inline RefitSchedule refit_schedule_from_string(const std::string& name) {
  if (name == "doubling") return RefitSchedule::kDoubling;
  if (name == "every") return RefitSchedule::kEvery;
  if (name == "never") return RefitSchedule::kNever;
  throw InvalidInput("unknown refit schedule: " + name);
}

struct SelectionConfig {
  int budget = 1;
  std::optional<int> pool_size = 256;  // nullopt scores every remaining point
  RefitSchedule refit = RefitSchedule::kDoubling;
  ModelConfig model;
  FitOptions fit;
  std::uint64_t rng_seed = 0;
  std::optional<Policy> initial_policy;  // policy before any feedback; zero if absent

  void validate(int n_points) const {
    if (budget < 1 || budget > n_points)
      throw InvalidInput("SelectionConfig: budget must be in [1, N]");
    if (pool_size && *pool_size < 1)
      throw InvalidInput("SelectionConfig: pool_size must be >= 1");
    model.validate();
    fit.validate();
  }
};

/// Hides the per-point feedback behind a query interface and enforces that
/// each point is queried at most once.
class FeedbackOracle {
 public:
  explicit FeedbackOracle(const PreferenceDataset& dataset)
      : queried_(dataset.points.size(), false) {
    feedback_.reserve(dataset.points.size());
    for (const auto& p : dataset.points) feedback_.push_back(p.feedback);
  }

  int query(int id) {
    if (id < 0 || id >= static_cast<int>(feedback_.size()))
      throw InvalidInput("FeedbackOracle: id out of range");
    if (queried_[id])
      throw ContractViolation("FeedbackOracle: id " + std::to_string(id) +
                              " queried twice");
    if (!feedback_[id].has_value())
      throw FeedbackMissing("FeedbackOracle: no feedback stored for id " +
                            std::to_string(id));
    queried_[id] = true;
    log_.push_back(id);
    return *feedback_[id];
  }

  const std::vector<int>& query_log() const { return log_; }

 private:
  std::vector<std::optional<int>> feedback_;
  std::vector<bool> queried_;
  std::vector<int> log_;
};

struct SelectionTrace {
  SelectionTrace(std::string algorithm, DesignState design)
      : algorithm(std::move(algorithm)), design_final(std::move(design)) {}

  std::string algorithm;
  std::vector<int> chosen;               // selected ids in round order
  std::vector<double> per_round_score;   // winning score per round
  std::vector<int> refit_rounds;         // rounds whose policy was (re)estimated
  std::vector<std::pair<int, Policy>> refit_policies;  // (round, policy in effect from it)
  std::optional<double> kappa_estimate;
  DesignState design_final;
};

// ============================================================================
// Acquisition scoring
// ============================================================================

/// Optimistic curvature weight: the logit is shrunk toward zero by alpha
/// standard deviations under `cov`, clamped at zero, and passed through
/// mu * (1 - mu). Always at least the plug-in weight and at most 0.25.
inline double ucb_weight(const PreferencePoint& point, const Policy& policy_hat,
                         const Matrix& cov, double alpha, double beta) {
  const double width = std::sqrt(std::max(0.0, point.phi.dot(cov * point.phi)));
  const double z =
      std::max(std::abs(logit(point, policy_hat, beta)) - alpha * width, 0.0);
  return sigmoid_weight(z);
}

/// Weighted feature difference beta * sqrt(w) * phi, where w is the plug-in
/// curvature weight, or the optimistic one when `cov` is given and alpha > 0.
inline Vector acquisition_vector(const PreferencePoint& point,
                                 const Policy& policy_hat,
                                 const ModelConfig& config,
                                 const Matrix* cov = nullptr) {
  const double w = (cov != nullptr && config.alpha > 0.0)
                       ? ucb_weight(point, policy_hat, *cov, config.alpha,
                                    config.beta)
                       : sigmoid_weight(logit(point, policy_hat, config.beta));
  return (config.beta * std::sqrt(w)) * point.phi;
}

struct AcquisitionScore {
  double score = 0.0;   // design variance of the weighted feature difference
  double weight = 0.0;  // curvature weight used
};

/// Variance score of a candidate in factored form: because the acquisition
/// vector is a scalar multiple of phi, its design variance is
/// beta^2 * w * (phi^T H^-1 phi); the quadratic form is computed once and
/// reused as the confidence width of the optimistic weight.
inline AcquisitionScore acquisition_score(const PreferencePoint& point,
                                          const Policy& policy_hat,
                                          const ModelConfig& config,
                                          const DesignState& design) {
  const double phi_var = design.variance(point.phi);
  double w;
  if (config.alpha > 0.0) {
    const double width = std::sqrt(std::max(0.0, phi_var));
    const double z = std::max(
        std::abs(logit(point, policy_hat, config.beta)) - config.alpha * width,
        0.0);
    w = sigmoid_weight(z);
  } else {
    w = sigmoid_weight(logit(point, policy_hat, config.beta));
  }
  return {config.beta * config.beta * w * phi_var, w};
}

// ============================================================================
// Internals shared by the greedy selectors
// ============================================================================

namespace detail {

inline bool should_refit(RefitSchedule schedule, int round) {
  switch (schedule) {
    case RefitSchedule::kEvery:
      return true;
    case RefitSchedule::kDoubling:
      return (round & (round - 1)) == 0;  // powers of two
    case RefitSchedule::kNever:
      return false;
  }
  return false;
}

/// The not-yet-chosen index set, with seeded without-replacement pool
/// subsampling resampled fresh each round.
class CandidatePool {
 public:
  CandidatePool(int n, std::uint64_t seed)
      : order_(n), position_(n), remaining_(n), rng_(seed) {
    std::iota(order_.begin(), order_.end(), 0);
    std::iota(position_.begin(), position_.end(), 0);
  }

  int remaining() const { return remaining_; }

  /// Draws min(pool_size, remaining) distinct ids; with no pool size, every
  /// remaining id is scored.
  std::span<const int> sample(std::optional<int> pool_size) {
    if (!pool_size || *pool_size >= remaining_)
      return {order_.data(), static_cast<size_t>(remaining_)};
    const int k = *pool_size;
    for (int j = 0; j < k; ++j) {
      std::uniform_int_distribution<int> pick(j, remaining_ - 1);
      swap_slots(j, pick(rng_));
    }
    return {order_.data(), static_cast<size_t>(k)};
  }

  void remove(int id) {
    swap_slots(position_[id], remaining_ - 1);
    --remaining_;
  }

 private:
  void swap_slots(int a, int b) {
    std::swap(order_[a], order_[b]);
    position_[order_[a]] = a;
    position_[order_[b]] = b;
  }

  std::vector<int> order_;     // first `remaining_` entries are candidates
  std::vector<int> position_;  // position_[id] = index into order_
  int remaining_;
  std::mt19937_64 rng_;
};

struct BestCandidate {
  int id = -1;
  double score = -std::numeric_limits<double>::infinity();
  double weight = 0.0;
};

/// Argmax with lowest-index tie-break, independent of iteration order.
template <typename ScoreFn>
BestCandidate argmax_over(std::span<const int> pool, ScoreFn&& score_of) {
  BestCandidate best;
  for (int id : pool) {
    const AcquisitionScore s = score_of(id);
    if (s.score > best.score || (s.score == best.score && id < best.id) ||
        best.id < 0) {
      best = {id, s.score, s.weight};
    }
  }
  return best;
}

/// Accumulates queried points into a private dataset and refits the policy
/// on them, warm-starting from the previous estimate.
class OnlineRefitter {
 public:
  OnlineRefitter(int dim, const SelectionConfig& sel) {
    observed_.dim = dim;
    policy_ = sel.initial_policy ? *sel.initial_policy
                                 : Policy{Vector::Zero(dim)};
    if (policy_.theta.size() != dim)
      throw InvalidInput("initial_policy dimension mismatch");
  }

  const Policy& policy() const { return policy_; }

  void absorb(const PreferencePoint& point, int feedback) {
    PreferencePoint copy = point;
    copy.id = static_cast<int>(observed_.points.size());
    copy.feedback = feedback;
    indices_.push_back(copy.id);
    observed_.points.push_back(std::move(copy));
  }

  void refit(const ModelConfig& config, const FitOptions& options) {
    if (observed_.points.empty()) return;
    policy_ = fit_dpo(observed_, indices_, config, options, policy_).policy;
  }

 private:
  PreferenceDataset observed_;
  std::vector<int> indices_;
  Policy policy_;
};

}  // namespace detail

// ============================================================================
// Selectors
// ============================================================================

/// Online greedy selection: per round, refit the policy on queried feedback
/// (per the refit schedule), score the pool by weighted design variance,
/// query feedback for the winner, and fold its acquisition vector into the
/// design. Deterministic given the seed.
inline SelectionTrace select_adpo(const PreferenceDataset& dataset,
                                  FeedbackOracle& oracle,
                                  const SelectionConfig& sel) {
  dataset.validate();
  sel.validate(dataset.size());
  const ModelConfig& cfg = sel.model;

  DesignState design(dataset.dim, cfg.gamma);
  detail::CandidatePool pool(dataset.size(), sel.rng_seed);
  detail::OnlineRefitter refitter(dataset.dim, sel);

  SelectionTrace trace("adpo", design);
  trace.refit_rounds.push_back(1);
  trace.refit_policies.emplace_back(1, refitter.policy());

  for (int t = 1; t <= sel.budget; ++t) {
    if (t > 1 && detail::should_refit(sel.refit, t)) {
      refitter.refit(cfg, sel.fit);
      trace.refit_rounds.push_back(t);
      trace.refit_policies.emplace_back(t, refitter.policy());
    }
    const auto candidates = pool.sample(sel.pool_size);
    const auto best = detail::argmax_over(candidates, [&](int id) {
      return acquisition_score(dataset.points[id], refitter.policy(), cfg,
                               design);
    });
    const int feedback = oracle.query(best.id);
    refitter.absorb(dataset.points[best.id], feedback);
    design.update((cfg.beta * std::sqrt(best.weight)) *
                  dataset.points[best.id].phi);
    trace.chosen.push_back(best.id);
    trace.per_round_score.push_back(best.score);
    pool.remove(best.id);
  }
  trace.design_final = std::move(design);
  return trace;
}

/// Offline greedy selection: the policy is fit once on the full dataset
/// (all feedback must be present), then the weighted-variance greedy loop
/// runs with that fixed policy and no feedback queries.
inline SelectionTrace select_adpo_plus(const PreferenceDataset& dataset,
                                       const SelectionConfig& sel) {
  dataset.validate();
  sel.validate(dataset.size());
  if (!dataset.all_feedback_present())
    throw FeedbackMissing("select_adpo_plus: dataset has points without feedback");
  const ModelConfig& cfg = sel.model;

  std::vector<int> all(dataset.size());
  std::iota(all.begin(), all.end(), 0);
  const Policy policy = fit_dpo(dataset, all, cfg, sel.fit).policy;

  DesignState design(dataset.dim, cfg.gamma);
  detail::CandidatePool pool(dataset.size(), sel.rng_seed);

  SelectionTrace trace("adpo_plus", design);
  trace.refit_rounds.push_back(1);
  trace.refit_policies.emplace_back(1, policy);

  for (int t = 1; t <= sel.budget; ++t) {
    const auto candidates = pool.sample(sel.pool_size);
    const auto best = detail::argmax_over(candidates, [&](int id) {
      return acquisition_score(dataset.points[id], policy, cfg, design);
    });
    design.update((cfg.beta * std::sqrt(best.weight)) *
                  dataset.points[best.id].phi);
    trace.chosen.push_back(best.id);
    trace.per_round_score.push_back(best.score);
    pool.remove(best.id);
  }
  trace.design_final = std::move(design);
  return trace;
}

/// Seeded uniform sampling without replacement.
inline SelectionTrace select_uniform(const PreferenceDataset& dataset,
                                     const SelectionConfig& sel) {
  dataset.validate();
  sel.validate(dataset.size());
  std::mt19937_64 rng(sel.rng_seed);
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  SelectionTrace trace("uniform", DesignState(dataset.dim, sel.model.gamma));
  for (int t = 0; t < sel.budget; ++t) {
    std::uniform_int_distribution<int> pick(t, dataset.size() - 1);
    std::swap(order[t], order[pick(rng)]);
    trace.chosen.push_back(order[t]);
  }
  return trace;
}

/// Weight-free greedy variance maximization on the raw feature differences;
/// no policy, no feedback, no refits.
inline SelectionTrace select_apo(const PreferenceDataset& dataset,
                                 const SelectionConfig& sel) {
  dataset.validate();
  sel.validate(dataset.size());
  DesignState design(dataset.dim, sel.model.gamma);
  detail::CandidatePool pool(dataset.size(), sel.rng_seed);
  SelectionTrace trace("apo", design);
  for (int t = 1; t <= sel.budget; ++t) {
    const auto candidates = pool.sample(sel.pool_size);
    const auto best = detail::argmax_over(candidates, [&](int id) {
      return AcquisitionScore{design.variance(dataset.points[id].phi), 1.0};
    });
    design.update(dataset.points[best.id].phi);
    trace.chosen.push_back(best.id);
    trace.per_round_score.push_back(best.score);
    pool.remove(best.id);
  }
  trace.design_final = std::move(design);
  return trace;
}

/// Picks the point with the largest absolute implicit reward difference
/// |beta * (phi . theta - b)| under the current policy estimate; queries
/// feedback online and refits per the schedule, like select_adpo.
inline SelectionTrace select_pmc(const PreferenceDataset& dataset,
                                 FeedbackOracle& oracle,
                                 const SelectionConfig& sel) {
  dataset.validate();
  sel.validate(dataset.size());
  const ModelConfig& cfg = sel.model;
  detail::CandidatePool pool(dataset.size(), sel.rng_seed);
  detail::OnlineRefitter refitter(dataset.dim, sel);

  SelectionTrace trace("pmc", DesignState(dataset.dim, cfg.gamma));
  trace.refit_rounds.push_back(1);
  trace.refit_policies.emplace_back(1, refitter.policy());

  for (int t = 1; t <= sel.budget; ++t) {
    if (t > 1 && detail::should_refit(sel.refit, t)) {
      refitter.refit(cfg, sel.fit);
      trace.refit_rounds.push_back(t);
      trace.refit_policies.emplace_back(t, refitter.policy());
    }
    const auto candidates = pool.sample(sel.pool_size);
    const auto best = detail::argmax_over(candidates, [&](int id) {
      return AcquisitionScore{
          std::abs(logit(dataset.points[id], refitter.policy(), cfg.beta)),
          0.0};
    });
    const int feedback = oracle.query(best.id);
    refitter.absorb(dataset.points[best.id], feedback);
    trace.chosen.push_back(best.id);
    trace.per_round_score.push_back(best.score);
    pool.remove(best.id);
  }
  return trace;
}

// ============================================================================
// Diagnostics
// ============================================================================

/// Replays a greedy trace and reports the worst-case ratio, over rounds and
/// over every point in the dataset, of a candidate's variance score to the
/// chosen point's score. A chosen score of zero with any competing positive
/// score reports +infinity. Diagnostic only; not defined for selectors that
/// keep no design (uniform, pmc).
inline double empirical_kappa(const PreferenceDataset& dataset,
                              const SelectionTrace& trace,
                              const SelectionConfig& sel) {
  if (trace.algorithm != "adpo" && trace.algorithm != "adpo_plus" &&
      trace.algorithm != "apo")
    throw InvalidInput("empirical_kappa: trace has no design sequence");
  const ModelConfig& cfg = sel.model;
  const bool raw = trace.algorithm == "apo";

  DesignState design(dataset.dim, cfg.gamma);
  Policy policy{Vector::Zero(dataset.dim)};
  size_t next_policy = 0;
  double kappa = 1.0;

  for (size_t t = 1; t <= trace.chosen.size(); ++t) {
    while (next_policy < trace.refit_policies.size() &&
           trace.refit_policies[next_policy].first <= static_cast<int>(t)) {
      policy = trace.refit_policies[next_policy].second;
      ++next_policy;
    }
    auto score_of = [&](int id) {
      return raw ? AcquisitionScore{design.variance(dataset.points[id].phi), 1.0}
                 : acquisition_score(dataset.points[id], policy, cfg, design);
    };
    const int chosen = trace.chosen[t - 1];
    const AcquisitionScore chosen_score = score_of(chosen);
    for (int i = 0; i < dataset.size(); ++i) {
      const double numerator = score_of(i).score;
      if (chosen_score.score <= 0.0) {
        if (numerator > 0.0)
          return std::numeric_limits<double>::infinity();
        continue;
      }
      kappa = std::max(kappa, numerator / chosen_score.score);
    }
    const Vector v = raw ? dataset.points[chosen].phi
                         : Vector((cfg.beta * std::sqrt(chosen_score.weight)) *
                                  dataset.points[chosen].phi);
    design.update(v);
  }
  return kappa;
}

}  // namespace adpo
