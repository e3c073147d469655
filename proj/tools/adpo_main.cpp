// SPDX-License-Identifier: Apache-2.0

/**
 * Command-line front end: dataset generation, budget-sweep experiment runs,
 * and report rendering.
 *
 *   adpo generate --mode gaussian --n 8192 --dim 32 --seed 7 --out desk.jsonl
 *   adpo run --dataset desk.jsonl --algo adpo_plus --algo uniform \
 *            --budgets pow2:5:12 --seeds 0,1,2 --out results/
 *   adpo report --results results/results.csv --out results/
 *
 * Exit codes: 0 success, 2 invalid input, 3 numerical failure.
 */

#include <CLI11.hpp>

#include "adpo/dataset_io.hpp"
#include "adpo/datagen.hpp"
#include "adpo/experiment.hpp"
#include "adpo/report.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNumericalFailure = 3;

std::vector<int> parse_budgets(const std::string& text) {
  std::vector<int> budgets;
  if (text.rfind("pow2:", 0) == 0) {
    const auto rest = text.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw adpo::InvalidInput("--budgets pow2 form is pow2:lo:hi");
    const int lo = std::stoi(rest.substr(0, colon));
    const int hi = std::stoi(rest.substr(colon + 1));
    if (lo < 0 || hi < lo || hi > 30)
      throw adpo::InvalidInput("--budgets pow2 range out of bounds");
    for (int e = lo; e <= hi; ++e) budgets.push_back(1 << e);
    return budgets;
  }
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ','))
    budgets.push_back(std::stoi(item));
  if (budgets.empty()) throw adpo::InvalidInput("--budgets is empty");
  return budgets;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ','))
    seeds.push_back(std::stoull(item));
  if (seeds.empty()) throw adpo::InvalidInput("--seeds is empty");
  return seeds;
}

struct GenerateArgs {
  std::string mode = "gaussian";
  int n = 8192;
  int dim = 32;
  std::uint64_t seed = 0;
  double beta = 1.0;
  double feature_ridge = 1e-3;
  int positive_label = -1;
  std::string phi_file;
  std::string features_file;
  std::string out;
};

// Labeled feature rows for class mode: one {"x": [...], "label": int}
// record per line.
std::pair<adpo::Matrix, std::vector<int>> read_labeled_features(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw adpo::InvalidInput("cannot open features file: " + path);
  std::vector<adpo::Vector> rows;
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw adpo::InvalidInput(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
    const auto& x = record.at("x");
    adpo::Vector v(x.size());
    for (size_t k = 0; k < x.size(); ++k)
      v[static_cast<Eigen::Index>(k)] = x[k];
    rows.push_back(std::move(v));
    labels.push_back(record.at("label").get<int>());
  }
  if (rows.empty()) throw adpo::InvalidInput(path + ": no feature rows");
  adpo::Matrix m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return {std::move(m), std::move(labels)};
}

int run_generate(const GenerateArgs& args) {
  adpo::GeneratorSpec spec;
  spec.n_points = args.n;
  spec.dim = args.dim;
  spec.rng_seed = args.seed;
  spec.beta = args.beta;
  spec.feature_ridge = args.feature_ridge;
  if (args.positive_label >= 0) spec.positive_label = args.positive_label;

  adpo::Matrix phi;
  if (args.mode == "gaussian") {
    spec.mode = adpo::GeneratorMode::kGaussian;
    phi = adpo::gaussian_phi(spec);
  } else if (args.mode == "class") {
    spec.mode = adpo::GeneratorMode::kClassFeatures;
    if (args.features_file.empty())
      throw adpo::InvalidInput("class mode needs --features-file");
    auto [features, labels] = read_labeled_features(args.features_file);
    spec.dim = static_cast<int>(features.cols());
    phi = adpo::build_pairs_from_classes(features, labels, spec);
  } else if (args.mode == "import") {
    if (args.phi_file.empty())
      throw adpo::InvalidInput("import mode needs --phi-file");
    phi = adpo::read_phi_rows(args.phi_file);
    spec.mode = adpo::GeneratorMode::kGaussian;  // synthesis steps are shared
    spec.n_points = static_cast<int>(phi.rows());
    spec.dim = static_cast<int>(phi.cols());
  } else {
    throw adpo::InvalidInput("unknown --mode: " + args.mode);
  }

  auto [dataset, truth] = adpo::synthesize_dataset(phi, spec);
  adpo::DatasetMeta meta;
  meta.n = dataset.size();
  meta.dim = dataset.dim;
  meta.beta = spec.beta;
  meta.truth = std::move(truth);
  meta.spec = spec;
  adpo::write_dataset(args.out, dataset, meta);
  std::cout << "wrote " << dataset.size() << " points (d=" << dataset.dim
            << ") to " << args.out << '\n';
  return kExitOk;
}

struct RunArgs {
  std::string dataset;
  std::vector<std::string> algos;
  std::string budgets = "pow2:5:12";
  std::string seeds = "0";
  double beta = 1.0;
  double gamma = 1.0;
  double alpha = 3.0;
  int pool = 256;
  bool no_pool = false;
  std::string refit = "doubling";
  bool constrain_unit_ball = false;
  std::string out = ".";
};

int run_run(const RunArgs& args) {
  adpo::ExperimentPlan plan;
  plan.dataset_path = args.dataset;
  plan.algorithms = args.algos.empty()
                        ? adpo::known_algorithms()
                        : args.algos;
  plan.budgets = parse_budgets(args.budgets);
  plan.seeds = parse_seeds(args.seeds);
  plan.model.beta = args.beta;
  plan.model.gamma = args.gamma;
  plan.model.alpha = args.alpha;
  plan.pool_size = args.no_pool ? std::nullopt : std::optional<int>(args.pool);
  plan.refit = adpo::refit_schedule_from_string(args.refit);
  plan.constrain_unit_ball = args.constrain_unit_ball;
  plan.out_dir = args.out;

  const adpo::DatasetFile data = adpo::read_dataset(plan.dataset_path);
  const adpo::RunOutput output = adpo::run_plan(plan, data);

  std::filesystem::create_directories(plan.out_dir);
  adpo::write_results_csv(plan.out_dir + "/results.csv", output.rows);
  adpo::write_timings_csv(plan.out_dir + "/timings.csv", output.timings);
  std::cout << "wrote " << output.rows.size() << " rows to " << plan.out_dir
            << "/results.csv\n";
  return kExitOk;
}

int run_report(const std::string& results_path, const std::string& out_dir) {
  const auto rows = adpo::read_results_csv(results_path);
  std::filesystem::create_directories(out_dir);
  const auto aggregated = adpo::write_report(out_dir, rows);
  std::cout << "wrote " << aggregated.size() << " aggregate rows to " << out_dir
            << "/aggregate.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active selection of preference feedback for direct "
               "preference optimization"};
  app.require_subcommand(1);

  GenerateArgs generate_args;
  auto* generate = app.add_subcommand("generate", "Generate a dataset file");
  generate->add_option("--mode", generate_args.mode,
                       "gaussian | class | import");
  generate->add_option("--n", generate_args.n, "number of points");
  generate->add_option("--dim", generate_args.dim, "feature dimension");
  generate->add_option("--seed", generate_args.seed, "generator seed");
  generate->add_option("--beta", generate_args.beta,
                       "preference scale for the oracle fit");
  generate->add_option("--feature-ridge", generate_args.feature_ridge,
                       "ridge for the simulator fit");
  generate->add_option("--positive-label", generate_args.positive_label,
                       "positive class id (class mode)");
  generate->add_option("--phi-file", generate_args.phi_file,
                       "JSONL phi rows to import (import mode)");
  generate->add_option("--features-file", generate_args.features_file,
                       "JSONL labeled features (class mode)");
  generate->add_option("--out", generate_args.out, "output dataset path")
      ->required();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a budget-sweep experiment");
  run->add_option("--dataset", run_args.dataset, "dataset file")->required();
  run->add_option("--algo", run_args.algos,
                  "algorithm (repeatable); default all");
  run->add_option("--budgets", run_args.budgets,
                  "comma list or pow2:lo:hi");
  run->add_option("--seeds", run_args.seeds, "comma list of seeds");
  run->add_option("--beta", run_args.beta, "preference scale");
  run->add_option("--gamma", run_args.gamma, "design ridge");
  run->add_option("--alpha", run_args.alpha,
                  "optimistic weight width; 0 disables");
  run->add_option("--pool", run_args.pool, "candidate pool size");
  run->add_flag("--no-pool", run_args.no_pool, "score all remaining points");
  run->add_option("--refit", run_args.refit, "doubling | every | never");
  run->add_flag("--constrain-unit-ball", run_args.constrain_unit_ball,
                "project fits onto the unit ball");
  run->add_option("--out", run_args.out, "output directory");

  std::string report_results, report_out = ".";
  auto* report = app.add_subcommand("report", "Aggregate and chart results");
  report->add_option("--results", report_results, "results CSV")->required();
  report->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  try {
    if (generate->parsed()) return run_generate(generate_args);
    if (run->parsed()) return run_run(run_args);
    if (report->parsed()) return run_report(report_results, report_out);
  } catch (const adpo::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << " (iteration "
              << e.iteration << ")\n";
    return kExitNumericalFailure;
  } catch (const adpo::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const adpo::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  }
  return kExitOk;
}
