/*
 * Copyright 2026 The fairaudit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fairaudit/repro.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace fairaudit::repro {

VariantGrid VariantGrid::TreeCountNodeSizeGrid(const forest::ForestConfig& base) {
  VariantGrid grid;
  grid.base = base;
  grid.variants = {
      {"RF1", 750, 1, std::nullopt, std::nullopt},
      {"RF2", 250, 1, std::nullopt, std::nullopt},
      {"RF3", 500, 5, std::nullopt, std::nullopt},
      {"RF4", 500, 15, std::nullopt, std::nullopt},
  };
  return grid;
}

VariantGrid VariantGrid::FromJson(const nlohmann::json& j) {
  VariantGrid grid;
  try {
    if (j.contains("base")) grid.base = forest::ForestConfig::FromJson(j["base"]);
    for (const auto& v : j.at("variants")) {
      VariantOverride o;
      o.name = v.at("name").get<std::string>();
      auto opt = [&](const char* key, auto& field) {
        using T = typename std::remove_reference_t<decltype(field)>::value_type;
        if (v.contains(key) && !v[key].is_null()) field = v[key].get<T>();
      };
      opt("n_trees", o.n_trees);
      opt("ntree", o.n_trees);
      opt("min_node_size", o.min_node_size);
      opt("nodesize", o.min_node_size);
      opt("mtry", o.mtry);
      opt("seed", o.seed);
      grid.variants.push_back(std::move(o));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadConfig, e.what());
  }
  grid.Validate();
  return grid;
}

nlohmann::json VariantGrid::ToJson() const {
  nlohmann::json variants_json = nlohmann::json::array();
  for (std::size_t i = 0; i < variants.size(); ++i) {
    nlohmann::json v = ConfigFor(i).ToJson();
    v["name"] = variants[i].name;
    variants_json.push_back(std::move(v));
  }
  return {{"base", base.ToJson()}, {"variants", std::move(variants_json)}};
}

void VariantGrid::Validate() const {
  if (variants.size() < 2) throw Error(ErrorCode::kBadConfig, "a variant grid needs >= 2 variants");
  std::set<std::string> names;
  for (const auto& v : variants) {
    if (!names.insert(v.name).second) {
      throw Error(ErrorCode::kBadConfig, fmt::format("duplicate variant name '{}'", v.name));
    }
  }
}

forest::ForestConfig VariantGrid::ConfigFor(std::size_t variant) const {
  const VariantOverride& v = variants.at(variant);
  forest::ForestConfig c = base;
  if (v.n_trees) c.n_trees = *v.n_trees;
  if (v.min_node_size) c.min_node_size = *v.min_node_size;
  if (v.mtry) c.mtry = *v.mtry;
  if (v.seed) c.seed = *v.seed;
  return c;
}

std::vector<VariantPredictions> RunVariants(const tabular::FeatureMatrix& x,
                                            std::span<const std::uint8_t> labels,
                                            std::span<const std::size_t> train_rows,
                                            std::span<const std::size_t> eval_rows,
                                            const VariantGrid& grid,
                                            const forest::ThresholdRule& rule) {
  grid.Validate();
  tabular::FeatureMatrix eval_x(x.features(), eval_rows.size());
  for (std::size_t i = 0; i < eval_rows.size(); ++i) {
    for (std::size_t f = 0; f < x.n_features(); ++f) eval_x.set(i, f, x.at(eval_rows[i], f));
  }
  std::vector<VariantPredictions> out;
  for (std::size_t v = 0; v < grid.variants.size(); ++v) {
    VariantPredictions pred;
    pred.name = grid.variants[v].name;
    pred.config = grid.ConfigFor(v);
    const auto model = forest::TrainForest(x, labels, train_rows, pred.config);
    pred.model_hash = model.Hash();
    pred.predictions = forest::Classify(model.PredictScores(eval_x), rule);
    out.push_back(std::move(pred));
  }
  return out;
}

double Jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::vector<std::size_t> sa(a.begin(), a.end());
  std::vector<std::size_t> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::vector<std::size_t> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const std::size_t uni = sa.size() + sb.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

SimilarityMatrix::Entry SimilarityMatrix::MinOffDiagonal() const {
  Entry e;
  bool any = false;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    for (std::size_t j = i + 1; j < variants.size(); ++j) {
      if (!any || at(i, j) < e.value) e = {at(i, j), i, j};
      any = true;
    }
  }
  return e;
}

namespace {

SimilarityMatrix BuildMatrix(std::string group, std::span<const VariantPredictions> predictions,
                             const std::vector<std::size_t>& rows) {
  SimilarityMatrix m;
  m.group = std::move(group);
  m.n_rows = rows.size();
  std::vector<std::vector<std::size_t>> positive_sets;
  for (const auto& p : predictions) {
    m.variants.push_back(p.name);
    std::vector<std::size_t> set;
    for (std::size_t r : rows) {
      if (p.predictions[r]) set.push_back(r);
    }
    m.positives.push_back(set.size());
    positive_sets.push_back(std::move(set));
  }
  const std::size_t k = predictions.size();
  m.values.assign(k * k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double s = Jaccard(positive_sets[i], positive_sets[j]);
      m.values[i * k + j] = s;
      m.values[j * k + i] = s;
    }
  }
  return m;
}

}  // namespace

std::vector<SimilarityMatrix> PerGroupSimilarity(std::span<const VariantPredictions> predictions,
                                                 const metrics::GroupColumn& groups) {
  if (predictions.size() < 2) throw Error(ErrorCode::kBadConfig, "need >= 2 variants");
  const std::size_t n = groups.codes.size();
  for (const auto& p : predictions) {
    if (p.predictions.size() != n) {
      throw Error(ErrorCode::kLengthMismatch,
                  fmt::format("variant '{}' has {} predictions for {} rows", p.name,
                              p.predictions.size(), n));
    }
  }
  std::vector<std::vector<std::size_t>> by_group(groups.categories.size());
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    by_group.at(static_cast<std::size_t>(groups.codes[i])).push_back(i);
    all[i] = i;
  }
  std::vector<SimilarityMatrix> out;
  for (std::size_t g = 0; g < by_group.size(); ++g) {
    if (!by_group[g].empty()) out.push_back(BuildMatrix(groups.categories[g], predictions, by_group[g]));
  }
  out.push_back(BuildMatrix("all", predictions, all));
  return out;
}

}  // namespace fairaudit::repro
