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
#include <string_view>
#include <vector>

#include "fairaudit/random.hpp"
#include "fairaudit/tabular.hpp"
#include "json.hpp"

namespace fairaudit::forest {

using tabular::FeatureMatrix;

struct ForestConfig {
  std::size_t n_trees = 500;
  // Minimum number of rows in a terminal node.
  std::size_t min_node_size = 1;
  std::optional<std::size_t> max_depth;
  // Features tried per split; floor(sqrt(p)) (at least 1) when unset.
  std::optional<std::size_t> mtry;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults.
  static ForestConfig FromJson(const nlohmann::json& j);
  bool operator==(const ForestConfig&) const = default;
};

enum class Criterion { kGini, kVariance };

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  // Numeric split: left iff value <= threshold.
  double threshold = 0.0;
  // Categorical split: left iff code is in this ascending list.
  std::vector<std::int32_t> left_categories;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Positive fraction (Gini trees) or target mean (variance trees).
  double value = 0.0;
  std::uint32_t count = 0;
  std::uint32_t positives = 0;  // Gini trees only

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Binary tree in pre-order; node 0 is the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(Criterion criterion, std::vector<TreeNode> nodes)
      : criterion_(criterion), nodes_(std::move(nodes)) {}

  Criterion criterion() const { return criterion_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  // Index of the leaf reached by a feature row.
  std::size_t LeafIndex(std::span<const double> row) const;
  std::size_t LeafIndex(const FeatureMatrix& x, std::size_t row) const;
  // Node indices visited from the root to the leaf.
  std::vector<std::size_t> NodePath(const FeatureMatrix& x, std::size_t row) const;
  double Predict(std::span<const double> row) const { return nodes_[LeafIndex(row)].value; }
  double Predict(const FeatureMatrix& x, std::size_t row) const {
    return nodes_[LeafIndex(x, row)].value;
  }

  nlohmann::json ToJson() const;
  static DecisionTree FromJson(const nlohmann::json& j);
  bool operator==(const DecisionTree&) const = default;

 private:
  Criterion criterion_ = Criterion::kGini;
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  Criterion criterion = Criterion::kGini;
  std::size_t min_node_size = 1;
  std::optional<std::size_t> max_depth;
  // Features tried per node; all when unset.
  std::optional<std::size_t> mtry;
};

// 2 p (1 - p) for a node with n0 negatives and n1 positives.
double GiniImpurity(std::size_t n0, std::size_t n1);

// Greedy CART. `target` is indexed by matrix row (0/1 for Gini); only `rows`
// are read and a row may repeat (bootstrap). Ties between equally good splits
// go to the lowest feature index, then the lowest threshold.
DecisionTree BuildTree(const FeatureMatrix& x, std::span<const double> target,
                       std::span<const std::size_t> rows, const TreeParams& params, Rng& rng);

using ScoreVector = std::vector<double>;
using HardPredictions = std::vector<std::uint8_t>;

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(ForestConfig config, std::vector<tabular::FeatureInfo> features,
               std::vector<DecisionTree> trees)
      : config_(std::move(config)), features_(std::move(features)), trees_(std::move(trees)) {}

  const ForestConfig& config() const { return config_; }
  const std::vector<tabular::FeatureInfo>& features() const { return features_; }
  std::size_t n_features() const { return features_.size(); }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  // Mean over trees of the leaf positive fraction.
  double Score(std::span<const double> row) const;
  // Parallel over rows. Throws ArityMismatch.
  ScoreVector PredictScores(const FeatureMatrix& x) const;

  // Versioned document; keys are emitted in a fixed order so the bytes can be
  // hashed.
  nlohmann::json ToJson() const;
  static RandomForest FromJson(const nlohmann::json& j);
  std::string Serialize() const { return ToJson().dump(); }
  std::string Hash() const;

  bool operator==(const RandomForest&) const = default;

 private:
  ForestConfig config_;
  std::vector<tabular::FeatureInfo> features_;
  std::vector<DecisionTree> trees_;
};

// Trains on `rows` only; `labels` is indexed by matrix row. Trees are built
// in parallel, each from its own stream derived from (config.seed, tree index).
RandomForest TrainForest(const FeatureMatrix& x, std::span<const std::uint8_t> labels,
                         std::span<const std::size_t> rows, const ForestConfig& config);

// Serial implementations kept as the reference for the parallel kernels.
namespace reference {
RandomForest TrainForest(const FeatureMatrix& x, std::span<const std::uint8_t> labels,
                         std::span<const std::size_t> rows, const ForestConfig& config);
ScoreVector PredictScores(const RandomForest& forest, const FeatureMatrix& x);
}  // namespace reference

struct ThresholdRule {
  enum class Kind { kFixed, kTopQ };
  Kind kind = Kind::kFixed;
  double value = 0.5;

  static ThresholdRule Fixed(double t) { return {Kind::kFixed, t}; }
  static ThresholdRule TopQ(double q) { return {Kind::kTopQ, q}; }
  // "fixed:T" or "top_q:Q". Throws BadConfig.
  static ThresholdRule Parse(std::string_view text);
  std::string ToString() const;
  bool operator==(const ThresholdRule&) const = default;
};

// fixed(t): 1 iff score >= t. top_q(q): the ceil(q n) highest scores are 1,
// ties at the cutoff going to the lower row index.
HardPredictions Classify(std::span<const double> scores, const ThresholdRule& rule);

enum class Decision : std::uint8_t { kNegative = 0, kPositive = 1, kAbstain = 2 };

// Abstains iff lo <= score <= hi; otherwise thresholds at the band midpoint.
std::vector<Decision> RejectOptionClassify(std::span<const double> scores, double lo, double hi);

}  // namespace fairaudit::forest
