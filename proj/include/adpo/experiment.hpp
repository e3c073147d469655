#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file experiment.hpp
 * @brief Budget-sweep experiment runner and results CSV.
 *
 * A plan names a dataset, a set of selection algorithms, a sorted budget
 * list, and seeds. Each (algorithm, seed) cell runs one selection to the
 * largest budget; smaller budgets reuse prefixes of the chosen sequence
 * (greedy sequences are nested) with the policy refit per budget. Results
 * are appended in plan order, so the CSV is a pure function of the dataset
 * file and the plan. Wall-clock timings go to a separate file to keep the
 * results CSV reproducible byte for byte.
 */

#include "adpo/common.hpp"
#include "adpo/dataset_io.hpp"
#include "adpo/metrics.hpp"
#include "adpo/selection.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace adpo {

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names = {"adpo", "adpo_plus", "uniform",
                                                 "apo", "pmc"};
  return names;
}

struct ExperimentPlan {
  std::string dataset_path;
  std::vector<std::string> algorithms;
  std::vector<int> budgets;  // ascending
  std::vector<std::uint64_t> seeds;
  ModelConfig model;
  std::optional<int> pool_size = 256;
  RefitSchedule refit = RefitSchedule::kDoubling;
  bool constrain_unit_ball = false;
  std::string out_dir = ".";

  void validate(int n_points) const {
    if (algorithms.empty()) throw InvalidInput("plan: no algorithms");
    for (const auto& a : algorithms)
      if (std::find(known_algorithms().begin(), known_algorithms().end(), a) ==
          known_algorithms().end())
        throw InvalidInput("plan: unknown algorithm: " + a);
    if (budgets.empty()) throw InvalidInput("plan: no budgets");
    if (!std::is_sorted(budgets.begin(), budgets.end()))
      throw InvalidInput("plan: budgets must be ascending");
    for (int b : budgets)
      if (b < 1 || b > n_points)
        throw InvalidInput("plan: budget " + std::to_string(b) +
                           " out of range [1, " + std::to_string(n_points) +
                           "]");
    if (seeds.empty()) throw InvalidInput("plan: no seeds");
    model.validate();
  }
};

struct ResultRow {
  std::string algorithm;
  std::uint64_t seed = 0;
  int budget = 0;
  double max_logit_error = 0.0;
  double mean_logit_error = 0.0;
  double error_rate = 0.0;
  std::string config_fingerprint;
};

struct TimingRow {
  std::string algorithm;
  std::uint64_t seed = 0;
  int budget = 0;
  long wall_time_ms = 0;  // elapsed in the cell up to and including this budget
};

struct RunOutput {
  std::vector<ResultRow> rows;
  std::vector<TimingRow> timings;
};

// ============================================================================
// Formatting helpers
// ============================================================================

namespace detail {

/// Shortest decimal string that round-trips the double.
inline std::string format_double(double x) {
  char buf[40];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string refit_name(RefitSchedule schedule) {
  switch (schedule) {
    case RefitSchedule::kDoubling:
      return "doubling";
    case RefitSchedule::kEvery:
      return "every";
    case RefitSchedule::kNever:
      return "never";
  }
  return "?";
}

}  // namespace detail

/// Hash of every configuration knob that affects results, rendered as hex.
inline std::string config_fingerprint(const ExperimentPlan& plan) {
  std::ostringstream canon;
  canon << "beta=" << detail::format_double(plan.model.beta)
        << ";gamma=" << detail::format_double(plan.model.gamma)
        << ";alpha=" << detail::format_double(plan.model.alpha)
        << ";pool=" << (plan.pool_size ? std::to_string(*plan.pool_size) : "off")
        << ";refit=" << detail::refit_name(plan.refit)
        << ";ball=" << (plan.constrain_unit_ball ? "1" : "0");
  std::ostringstream hex;
  hex << std::hex << detail::fnv1a(canon.str());
  return hex.str();
}

// ============================================================================
// Runner
// ============================================================================

namespace detail {

inline SelectionTrace run_selector(const std::string& algorithm,
                                   const PreferenceDataset& dataset,
                                   const SelectionConfig& sel,
                                   FeedbackOracle* oracle) {
  if (algorithm == "adpo") return select_adpo(dataset, *oracle, sel);
  if (algorithm == "adpo_plus") return select_adpo_plus(dataset, sel);
  if (algorithm == "uniform") return select_uniform(dataset, sel);
  if (algorithm == "apo") return select_apo(dataset, sel);
  if (algorithm == "pmc") return select_pmc(dataset, *oracle, sel);
  throw InvalidInput("unknown algorithm: " + algorithm);
}

}  // namespace detail

/// Runs every (algorithm, seed) cell of the plan against the dataset and
/// evaluates the refit policy at each budget against the stored oracle
/// policy. Online selectors see feedback only through a FeedbackOracle.
inline RunOutput run_plan(const ExperimentPlan& plan, const DatasetFile& data) {
  const PreferenceDataset& dataset = data.dataset;
  plan.validate(dataset.size());
  if (plan.model.beta != data.meta.beta)
    throw InvalidInput(
        "plan beta does not match the beta the stored oracle policy was fit "
        "with; regenerate the dataset at this beta");

  const Policy& theta_star = data.meta.truth.theta_star;
  const std::string fingerprint = config_fingerprint(plan);
  const int max_budget = plan.budgets.back();

  FitOptions fit;
  if (plan.constrain_unit_ball) fit.constraint_radius = 1.0;

  RunOutput out;
  for (const auto& algorithm : plan.algorithms) {
    for (const std::uint64_t seed : plan.seeds) {
      const auto t0 = std::chrono::steady_clock::now();

      SelectionConfig sel;
      sel.budget = max_budget;
      sel.pool_size = plan.pool_size;
      sel.refit = plan.refit;
      sel.model = plan.model;
      sel.fit = fit;
      sel.rng_seed = seed;

      const bool online = algorithm == "adpo" || algorithm == "pmc";
      FeedbackOracle oracle(dataset);
      const SelectionTrace trace = detail::run_selector(
          algorithm, dataset, sel, online ? &oracle : nullptr);
      if (online &&
          oracle.query_log().size() != static_cast<size_t>(max_budget))
        throw ContractViolation("online selector query count mismatch");

      std::optional<Policy> warm;
      for (const int budget : plan.budgets) {
        const std::span<const int> subset(trace.chosen.data(),
                                          static_cast<size_t>(budget));
        warm = fit_dpo(dataset, subset, plan.model, fit, warm).policy;
        const MetricsReport metrics =
            evaluate(dataset, *warm, theta_star, plan.model.beta, budget);
        out.rows.push_back({algorithm, seed, budget, metrics.max_logit_error,
                            metrics.mean_logit_error, metrics.error_rate,
                            fingerprint});
        const auto elapsed =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
        out.timings.push_back(
            {algorithm, seed, budget, static_cast<long>(elapsed)});
      }
    }
  }
  return out;
}

// ============================================================================
// Results CSV
// ============================================================================

inline constexpr std::string_view kResultsSchemaLine = "# adpo-results-schema 1";
inline constexpr std::string_view kResultsHeader =
    "algorithm,seed,budget,max_logit_error,mean_logit_error,error_rate,config";

inline void write_results_csv(const std::string& path,
                              const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out << kResultsSchemaLine << '\n' << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.seed << ',' << r.budget << ','
        << detail::format_double(r.max_logit_error) << ','
        << detail::format_double(r.mean_logit_error) << ','
        << detail::format_double(r.error_rate) << ',' << r.config_fingerprint
        << '\n';
  }
  if (!out) throw InvalidInput("write failed: " + path);
}

inline void write_timings_csv(const std::string& path,
                              const std::vector<TimingRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out << "# adpo-timings-schema 1\nalgorithm,seed,budget,wall_time_ms\n";
  for (const auto& r : rows)
    out << r.algorithm << ',' << r.seed << ',' << r.budget << ','
        << r.wall_time_ms << '\n';
  if (!out) throw InvalidInput("write failed: " + path);
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end)
    throw InvalidInput(where + ": bad number '" + text + "'");
  return value;
}

}  // namespace detail

/// Parses a results CSV written by write_results_csv. Malformed rows raise
/// InvalidInput naming the offending line.
inline std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open results: " + path);
  std::vector<ResultRow> rows;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kResultsHeader)
        throw InvalidInput(path + ":" + std::to_string(line_no) +
                           ": unexpected header");
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_fields(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 7)
      throw InvalidInput(where + ": expected 7 fields, got " +
                         std::to_string(fields.size()));
    ResultRow r;
    r.algorithm = fields[0];
    r.seed = detail::parse_number<std::uint64_t>(fields[1], where);
    r.budget = detail::parse_number<int>(fields[2], where);
    r.max_logit_error = detail::parse_number<double>(fields[3], where);
    r.mean_logit_error = detail::parse_number<double>(fields[4], where);
    r.error_rate = detail::parse_number<double>(fields[5], where);
    r.config_fingerprint = fields[6];
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw InvalidInput(path + ": missing header");
  return rows;
}

}  // namespace adpo
