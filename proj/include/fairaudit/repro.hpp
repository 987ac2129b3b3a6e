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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/forest.hpp"
#include "fairaudit/metrics.hpp"
#include "json.hpp"

namespace fairaudit::repro {

struct VariantOverride {
  std::string name;
  std::optional<std::size_t> n_trees;
  std::optional<std::size_t> min_node_size;
  std::optional<std::size_t> mtry;
  // Unset: the variant shares the base seed, so differences come from the
  // hyperparameters alone.
  std::optional<std::uint64_t> seed;
};

struct VariantGrid {
  forest::ForestConfig base;
  std::vector<VariantOverride> variants;

  // The four-forest sweep over tree count and terminal node size:
  // RF1 750/1, RF2 250/1, RF3 500/5, RF4 500/15.
  static VariantGrid TreeCountNodeSizeGrid(const forest::ForestConfig& base);
  static VariantGrid FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;

  // Throws BadConfig: fewer than 2 variants or duplicate names.
  void Validate() const;
  forest::ForestConfig ConfigFor(std::size_t variant) const;
};

struct VariantPredictions {
  std::string name;
  forest::ForestConfig config;
  std::string model_hash;
  forest::HardPredictions predictions;  // aligned with the eval rows
};

// Every variant is trained on the same rows and classified with the same rule.
std::vector<VariantPredictions> RunVariants(const tabular::FeatureMatrix& x,
                                            std::span<const std::uint8_t> labels,
                                            std::span<const std::size_t> train_rows,
                                            std::span<const std::size_t> eval_rows,
                                            const VariantGrid& grid,
                                            const forest::ThresholdRule& rule);

// |a ∩ b| / |a ∪ b|, 1 when both are empty. Inputs need not be sorted.
double Jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct SimilarityMatrix {
  std::string group;  // category, or "all"
  std::size_t n_rows = 0;
  std::vector<std::string> variants;
  std::vector<std::size_t> positives;  // predicted-positive count per variant
  std::vector<double> values;          // row-major, variants x variants

  double at(std::size_t i, std::size_t j) const { return values[i * variants.size() + j]; }
  // Smallest off-diagonal entry and its (i, j), i < j.
  struct Entry {
    double value = 1.0;
    std::size_t i = 0;
    std::size_t j = 0;
  };
  Entry MinOffDiagonal() const;
};

// One matrix per group present in `groups` (category order), then the
// all-rows matrix. Predicted-positive sets are compared within each group.
std::vector<SimilarityMatrix> PerGroupSimilarity(std::span<const VariantPredictions> predictions,
                                                 const metrics::GroupColumn& groups);

}  // namespace fairaudit::repro
