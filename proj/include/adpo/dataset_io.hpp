#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * @file dataset_io.hpp
 * @brief JSONL persistence for preference datasets.
 *
 * A dataset file holds one JSON record per point:
 *   {"b": <bias>, "id": <int>, "phi": [<d doubles>], "s": 0|1}
 * and a sidecar metadata file (<stem>.meta.json) with the dimensions, the
 * preference scale used for the oracle fit, the ground-truth vectors, the
 * generator spec, and the seed. Doubles round-trip exactly, so a reloaded
 * oracle policy reproduces the stored one bit for bit.
 */

#include "adpo/common.hpp"
#include "adpo/datagen.hpp"
#include "adpo/model.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace adpo {

struct DatasetMeta {
  int n = 0;
  int dim = 0;
  double beta = 1.0;  // preference scale the oracle policy was fit with
  GroundTruth truth;
  GeneratorSpec spec;
};

struct DatasetFile {
  PreferenceDataset dataset;
  DatasetMeta meta;
};

namespace detail {

inline std::string meta_path_for(const std::string& dataset_path) {
  constexpr std::string_view ext = ".jsonl";
  if (dataset_path.size() > ext.size() &&
      dataset_path.compare(dataset_path.size() - ext.size(), ext.size(), ext) ==
          0)
    return dataset_path.substr(0, dataset_path.size() - ext.size()) +
           ".meta.json";
  return dataset_path + ".meta.json";
}

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vector vector_from_json(const nlohmann::json& a) {
  Vector v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
  return v;
}

inline std::string mode_name(GeneratorMode mode) {
  return mode == GeneratorMode::kGaussian ? "gaussian" : "class_features";
}

inline GeneratorMode mode_from_name(const std::string& name) {
  if (name == "gaussian") return GeneratorMode::kGaussian;
  if (name == "class_features") return GeneratorMode::kClassFeatures;
  throw InvalidInput("unknown generator mode: " + name);
}

}  // namespace detail

inline void write_dataset(const std::string& path,
                          const PreferenceDataset& dataset,
                          const DatasetMeta& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  for (const auto& p : dataset.points) {
    nlohmann::json record;
    record["id"] = p.id;
    record["phi"] = detail::vector_to_json(p.phi);
    record["b"] = p.bias;
    if (p.feedback) record["s"] = *p.feedback;
    out << record.dump() << '\n';
  }
  if (!out) throw InvalidInput("write failed: " + path);

  nlohmann::json m;
  m["schema"] = 1;
  m["n"] = meta.n;
  m["d"] = meta.dim;
  m["beta"] = meta.beta;
  m["theta_star"] = detail::vector_to_json(meta.truth.theta_star.theta);
  m["theta_bar"] = detail::vector_to_json(meta.truth.theta_bar);
  m["theta_ref"] = detail::vector_to_json(meta.truth.theta_ref);
  m["generator"] = {{"mode", detail::mode_name(meta.spec.mode)},
                    {"n_points", meta.spec.n_points},
                    {"dim", meta.spec.dim},
                    {"feature_ridge", meta.spec.feature_ridge},
                    {"seed", meta.spec.rng_seed}};
  if (meta.spec.positive_label)
    m["generator"]["positive_label"] = *meta.spec.positive_label;

  const std::string meta_path = detail::meta_path_for(path);
  std::ofstream mout(meta_path, std::ios::binary | std::ios::trunc);
  if (!mout) throw InvalidInput("cannot open for writing: " + meta_path);
  mout << m.dump(2) << '\n';
  if (!mout) throw InvalidInput("write failed: " + meta_path);
}

inline DatasetFile read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open dataset: " + path);

  DatasetFile file;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(path + ":" + std::to_string(line_no) + ": " +
                         e.what());
    }
    PreferencePoint p;
    p.id = record.at("id").get<int>();
    p.phi = detail::vector_from_json(record.at("phi"));
    p.bias = record.at("b").get<double>();
    if (record.contains("s")) p.feedback = record.at("s").get<int>();
    file.dataset.points.push_back(std::move(p));
  }
  if (file.dataset.points.empty())
    throw InvalidInput(path + ": no records");
  file.dataset.dim = static_cast<int>(file.dataset.points.front().phi.size());
  file.dataset.validate();

  const std::string meta_path = detail::meta_path_for(path);
  std::ifstream min(meta_path, std::ios::binary);
  if (!min) throw InvalidInput("cannot open dataset metadata: " + meta_path);
  nlohmann::json m;
  try {
    min >> m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(meta_path + ": " + e.what());
  }
  file.meta.n = m.at("n").get<int>();
  file.meta.dim = m.at("d").get<int>();
  file.meta.beta = m.at("beta").get<double>();
  file.meta.truth.theta_star.theta =
      detail::vector_from_json(m.at("theta_star"));
  file.meta.truth.theta_bar = detail::vector_from_json(m.at("theta_bar"));
  file.meta.truth.theta_ref = detail::vector_from_json(m.at("theta_ref"));
  const auto& gen = m.at("generator");
  file.meta.spec.mode = detail::mode_from_name(gen.at("mode").get<std::string>());
  file.meta.spec.n_points = gen.at("n_points").get<int>();
  file.meta.spec.dim = gen.at("dim").get<int>();
  file.meta.spec.feature_ridge = gen.at("feature_ridge").get<double>();
  file.meta.spec.rng_seed = gen.at("seed").get<std::uint64_t>();
  if (gen.contains("positive_label"))
    file.meta.spec.positive_label = gen.at("positive_label").get<int>();
  file.meta.spec.beta = file.meta.beta;

  if (file.meta.n != file.dataset.size() || file.meta.dim != file.dataset.dim)
    throw InvalidInput(meta_path + ": metadata does not match dataset shape");
  return file;
}

/// Reads feature-difference rows from a JSONL file of {"phi": [...]}
/// records; any other keys are ignored. Used to import externally computed
/// embeddings into the synthesis pipeline.
inline Matrix read_phi_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open embedding file: " + path);
  std::vector<Vector> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(path + ":" + std::to_string(line_no) + ": " +
                         e.what());
    }
    rows.push_back(detail::vector_from_json(record.at("phi")));
  }
  if (rows.empty()) throw InvalidInput(path + ": no phi rows");
  Matrix m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols())
      throw InvalidInput(path + ": inconsistent phi length at row " +
                         std::to_string(i + 1));
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

}  // namespace adpo
