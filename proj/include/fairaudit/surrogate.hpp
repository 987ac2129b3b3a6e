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

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/common.hpp"
#include "fairaudit/forest.hpp"
#include "fairaudit/tabular.hpp"
#include "json.hpp"

namespace fairaudit::surrogate {

enum class Target { kScore, kHardLabel };

std::string_view TargetName(Target t);
Target ParseTarget(std::string_view s);  // throws BadConfig

struct RowFilter {
  std::string column;
  std::string category;
};

struct SurrogateConfig {
  std::size_t max_depth = 3;
  Target target = Target::kScore;
  std::optional<RowFilter> filter;
  std::size_t min_node_size = 5;
  // Black-box hard label: 1 iff score >= label_threshold.
  double label_threshold = 0.5;
  // Share of the filtered rows held out to measure fidelity.
  double fidelity_fraction = 0.2;
  std::uint64_t seed = 0;

  nlohmann::json ToJson() const;
  static SurrogateConfig FromJson(const nlohmann::json& j);
};

// Any model that maps a feature row to a score. Labels are never an input.
struct BlackBox {
  std::vector<tabular::FeatureInfo> features;
  std::function<double(std::span<const double>)> score;

  // Keeps a reference; the forest must outlive the black box.
  static BlackBox FromForest(const forest::RandomForest& model);
  static BlackBox FromTree(forest::DecisionTree tree, std::vector<tabular::FeatureInfo> features);
};

struct SurrogateResult {
  SurrogateConfig config;
  forest::DecisionTree tree;
  std::vector<tabular::FeatureInfo> features;
  Rate fidelity_r2;  // score target only; undefined for zero-variance output
  Rate agreement;    // hard-label agreement on the fidelity rows
  std::vector<std::size_t> rows_used;
  std::vector<std::size_t> fit_rows;
  std::vector<std::size_t> fidelity_rows;
  // Aligned with fidelity_rows.
  std::vector<double> blackbox_scores;
  std::vector<double> surrogate_outputs;
  std::vector<std::uint8_t> blackbox_labels;
  std::vector<std::uint8_t> surrogate_labels;

  nlohmann::json ToJson() const;
};

// Fits a CART surrogate to the black box's outputs on `rows` (after the
// optional filter). The filter column never becomes a surrogate feature.
// Throws EmptyAfterFilter, TooFewRows, UnknownColumn, UnknownGroup.
SurrogateResult FitSurrogate(const BlackBox& blackbox, const tabular::Dataset& ds,
                             std::span<const std::size_t> rows, const SurrogateConfig& config);

struct GroupFidelity {
  std::string group;
  std::size_t n = 0;
  Rate r2;
  Rate agreement;
  bool low_support = false;
};

// Fidelity recomputed per category of `group_column` on the fidelity rows.
std::vector<GroupFidelity> FidelityByGroup(const SurrogateResult& result,
                                           const tabular::Dataset& ds,
                                           std::string_view group_column,
                                           std::size_t min_support = 20);

// R^2 of `predicted` against `reference`; undefined when the reference is constant.
Rate RSquared(std::span<const double> reference, std::span<const double> predicted);

struct RenderedTree {
  std::string text;
  std::string svg;
};

// Left branches are the ones where the condition holds.
RenderedTree RenderTree(const forest::DecisionTree& tree,
                        std::span<const tabular::FeatureInfo> features,
                        std::string_view title = "");

}  // namespace fairaudit::surrogate
