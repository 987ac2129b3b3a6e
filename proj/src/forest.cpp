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

#include "fairaudit/forest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "fairaudit/common.hpp"
#include "fairaudit/digest.hpp"

namespace fairaudit::forest {

namespace {

constexpr int kModelVersion = 1;
constexpr double kMinGain = 1e-12;

struct Stats {
  double n = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;

  void Add(double y) {
    n += 1.0;
    sum += y;
    sumsq += y * y;
  }
  void Add(const Stats& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  Stats Minus(const Stats& o) const { return {n - o.n, sum - o.sum, sumsq - o.sumsq}; }
};

// Node impurity times node size.
double WeightedImpurity(Criterion criterion, const Stats& s) {
  if (s.n <= 0.0) return 0.0;
  if (criterion == Criterion::kGini) return 2.0 * s.sum * (s.n - s.sum) / s.n;
  return std::max(0.0, s.sumsq - s.sum * s.sum / s.n);
}

struct Candidate {
  bool found = false;
  double gain = 0.0;
  std::size_t feature = 0;
  double threshold = 0.0;        // numeric threshold or prefix length
  std::vector<std::int32_t> left_categories;
};

bool IsBetter(double gain, const Candidate& best) {
  return !best.found ? gain > kMinGain : gain > best.gain + kMinGain;
}

void SearchNumeric(const FeatureMatrix& x, std::span<const double> target,
                   std::span<const std::size_t> rows, std::size_t feature,
                   const Stats& total, double parent, const TreeParams& params,
                   Candidate& best) {
  std::vector<std::pair<double, double>> points;
  points.reserve(rows.size());
  for (std::size_t r : rows) points.emplace_back(x.at(r, feature), target[r]);
  std::sort(points.begin(), points.end());
  const double min_size = static_cast<double>(params.min_node_size);
  Stats left;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    left.Add(points[i].second);
    if (points[i].first == points[i + 1].first) continue;
    const Stats right = total.Minus(left);
    if (left.n < min_size || right.n < min_size) continue;
    const double gain = (parent - WeightedImpurity(params.criterion, left) -
                         WeightedImpurity(params.criterion, right)) /
                        total.n;
    if (IsBetter(gain, best)) {
      double mid = points[i].first + (points[i + 1].first - points[i].first) / 2.0;
      if (!(mid < points[i + 1].first)) mid = points[i].first;
      best.found = true;
      best.gain = gain;
      best.feature = feature;
      best.threshold = mid;
      best.left_categories.clear();
    }
  }
}

// Categories ordered by mean target; prefix cuts of that order are the
// optimal binary partitions for both criteria.
void SearchCategorical(const FeatureMatrix& x, std::span<const double> target,
                       std::span<const std::size_t> rows, std::size_t feature,
                       const Stats& total, double parent, const TreeParams& params,
                       Candidate& best) {
  const std::size_t n_cats = x.features()[feature].categories.size();
  std::vector<Stats> per(n_cats);
  for (std::size_t r : rows) {
    const auto code = static_cast<std::size_t>(x.at(r, feature));
    if (code < n_cats) per[code].Add(target[r]);
  }
  std::vector<std::int32_t> present;
  for (std::size_t c = 0; c < n_cats; ++c) {
    if (per[c].n > 0.0) present.push_back(static_cast<std::int32_t>(c));
  }
  if (present.size() < 2) return;
  std::stable_sort(present.begin(), present.end(), [&](std::int32_t a, std::int32_t b) {
    return per[a].sum / per[a].n < per[b].sum / per[b].n;
  });
  const double min_size = static_cast<double>(params.min_node_size);
  Stats left;
  for (std::size_t k = 0; k + 1 < present.size(); ++k) {
    left.Add(per[present[k]]);
    const Stats right = total.Minus(left);
    if (left.n < min_size || right.n < min_size) continue;
    const double gain = (parent - WeightedImpurity(params.criterion, left) -
                         WeightedImpurity(params.criterion, right)) /
                        total.n;
    if (IsBetter(gain, best)) {
      best.found = true;
      best.gain = gain;
      best.feature = feature;
      best.threshold = static_cast<double>(k + 1);
      best.left_categories.assign(present.begin(), present.begin() + k + 1);
      std::sort(best.left_categories.begin(), best.left_categories.end());
    }
  }
}

bool GoesLeft(const TreeNode& node, double value) {
  if (node.left_categories.empty()) return value <= node.threshold;
  return std::binary_search(node.left_categories.begin(), node.left_categories.end(),
                            static_cast<std::int32_t>(value));
}

struct PendingNode {
  std::vector<std::size_t> rows;
  std::size_t depth = 0;
  std::int32_t parent = -1;
  bool is_left = false;
};

}  // namespace

nlohmann::json ForestConfig::ToJson() const {
  nlohmann::json j = {{"n_trees", n_trees},
                      {"min_node_size", min_node_size},
                      {"bootstrap", bootstrap},
                      {"seed", seed}};
  j["max_depth"] = max_depth ? nlohmann::json(*max_depth) : nlohmann::json(nullptr);
  j["mtry"] = mtry ? nlohmann::json(*mtry) : nlohmann::json(nullptr);
  return j;
}

ForestConfig ForestConfig::FromJson(const nlohmann::json& j) {
  ForestConfig c;
  try {
    if (j.contains("n_trees")) c.n_trees = j["n_trees"].get<std::size_t>();
    if (j.contains("ntree")) c.n_trees = j["ntree"].get<std::size_t>();
    if (j.contains("min_node_size")) c.min_node_size = j["min_node_size"].get<std::size_t>();
    if (j.contains("nodesize")) c.min_node_size = j["nodesize"].get<std::size_t>();
    if (j.contains("max_depth") && !j["max_depth"].is_null()) {
      c.max_depth = j["max_depth"].get<std::size_t>();
    }
    if (j.contains("mtry") && !j["mtry"].is_null()) c.mtry = j["mtry"].get<std::size_t>();
    if (j.contains("bootstrap")) c.bootstrap = j["bootstrap"].get<bool>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadConfig, e.what());
  }
  return c;
}

double GiniImpurity(std::size_t n0, std::size_t n1) {
  const std::size_t n = n0 + n1;
  if (n == 0) return 0.0;
  const double p = static_cast<double>(n1) / static_cast<double>(n);
  return 2.0 * p * (1.0 - p);
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) {
      deepest = std::max(deepest, level[i]);
      continue;
    }
    level[static_cast<std::size_t>(n.left)] = level[i] + 1;
    level[static_cast<std::size_t>(n.right)] = level[i] + 1;
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::LeafIndex(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(GoesLeft(n, row[static_cast<std::size_t>(n.feature)]) ? n.left
                                                                                       : n.right);
  }
  return i;
}

std::size_t DecisionTree::LeafIndex(const FeatureMatrix& x, std::size_t row) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(
        GoesLeft(n, x.at(row, static_cast<std::size_t>(n.feature))) ? n.left : n.right);
  }
  return i;
}

std::vector<std::size_t> DecisionTree::NodePath(const FeatureMatrix& x, std::size_t row) const {
  std::vector<std::size_t> path = {0};
  while (!nodes_[path.back()].is_leaf()) {
    const TreeNode& n = nodes_[path.back()];
    path.push_back(static_cast<std::size_t>(
        GoesLeft(n, x.at(row, static_cast<std::size_t>(n.feature))) ? n.left : n.right));
  }
  return path;
}

nlohmann::json DecisionTree::ToJson() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : nodes_) {
    nlohmann::json j = {{"count", n.count}, {"value", n.value}};
    if (criterion_ == Criterion::kGini) j["positives"] = n.positives;
    if (!n.is_leaf()) {
      j["feature"] = n.feature;
      j["left"] = n.left;
      j["right"] = n.right;
      if (n.left_categories.empty()) {
        j["threshold"] = n.threshold;
      } else {
        j["left_categories"] = n.left_categories;
      }
    }
    nodes.push_back(std::move(j));
  }
  return {{"criterion", criterion_ == Criterion::kGini ? "gini" : "variance"},
          {"nodes", std::move(nodes)}};
}

DecisionTree DecisionTree::FromJson(const nlohmann::json& j) {
  try {
    const std::string crit = j.at("criterion").get<std::string>();
    if (crit != "gini" && crit != "variance") {
      throw Error(ErrorCode::kBadModel, "unknown criterion " + crit);
    }
    std::vector<TreeNode> nodes;
    for (const auto& jn : j.at("nodes")) {
      TreeNode n;
      n.count = jn.at("count").get<std::uint32_t>();
      n.value = jn.at("value").get<double>();
      if (jn.contains("positives")) n.positives = jn["positives"].get<std::uint32_t>();
      if (jn.contains("feature")) {
        n.feature = jn["feature"].get<std::int32_t>();
        n.left = jn.at("left").get<std::int32_t>();
        n.right = jn.at("right").get<std::int32_t>();
        if (jn.contains("left_categories")) {
          n.left_categories = jn["left_categories"].get<std::vector<std::int32_t>>();
        } else {
          n.threshold = jn.at("threshold").get<double>();
        }
      }
      nodes.push_back(std::move(n));
    }
    const auto size = static_cast<std::int32_t>(nodes.size());
    for (std::int32_t i = 0; i < size; ++i) {
      const TreeNode& n = nodes[static_cast<std::size_t>(i)];
      if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= size || n.right >= size)) {
        throw Error(ErrorCode::kBadModel, "tree node links are not in pre-order");
      }
    }
    if (nodes.empty()) throw Error(ErrorCode::kBadModel, "empty tree");
    return DecisionTree(crit == "gini" ? Criterion::kGini : Criterion::kVariance,
                        std::move(nodes));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadModel, e.what());
  }
}

DecisionTree BuildTree(const FeatureMatrix& x, std::span<const double> target,
                       std::span<const std::size_t> rows, const TreeParams& params, Rng& rng) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyTraining, "no training rows");
  const std::size_t p = x.n_features();
  if (p == 0) throw Error(ErrorCode::kEmptyTraining, "no features");
  if (params.min_node_size == 0) throw Error(ErrorCode::kBadConfig, "min_node_size must be >= 1");
  const std::size_t mtry = std::min(params.mtry.value_or(p), p);
  if (mtry == 0) throw Error(ErrorCode::kBadConfig, "mtry must be >= 1");

  std::vector<TreeNode> nodes;
  std::vector<PendingNode> stack;
  stack.push_back({std::vector<std::size_t>(rows.begin(), rows.end()), 0, -1, false});
  std::vector<std::size_t> pool(p);

  while (!stack.empty()) {
    PendingNode pending = std::move(stack.back());
    stack.pop_back();
    const auto index = static_cast<std::int32_t>(nodes.size());
    if (pending.parent >= 0) {
      TreeNode& parent = nodes[static_cast<std::size_t>(pending.parent)];
      (pending.is_left ? parent.left : parent.right) = index;
    }

    Stats total;
    for (std::size_t r : pending.rows) total.Add(target[r]);
    TreeNode node;
    node.count = static_cast<std::uint32_t>(pending.rows.size());
    node.value = total.sum / total.n;
    if (params.criterion == Criterion::kGini) {
      node.positives = static_cast<std::uint32_t>(std::llround(total.sum));
    }

    const double parent_impurity = WeightedImpurity(params.criterion, total);
    const bool depth_ok = !params.max_depth || pending.depth < *params.max_depth;
    const bool size_ok = pending.rows.size() >= 2 * params.min_node_size;
    Candidate best;
    if (depth_ok && size_ok && parent_impurity > 0.0) {
      std::iota(pool.begin(), pool.end(), 0);
      if (mtry < p) {
        for (std::size_t i = 0; i < mtry; ++i) {
          std::swap(pool[i], pool[i + rng.Below(p - i)]);
        }
        std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(mtry));
      }
      for (std::size_t k = 0; k < mtry; ++k) {
        const std::size_t f = pool[k];
        if (x.features()[f].kind == tabular::FeatureKind::kNumeric) {
          SearchNumeric(x, target, pending.rows, f, total, parent_impurity, params, best);
        } else {
          SearchCategorical(x, target, pending.rows, f, total, parent_impurity, params, best);
        }
      }
    }

    if (!best.found) {
      nodes.push_back(std::move(node));
      continue;
    }
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.left_categories.empty() ? best.threshold : 0.0;
    node.left_categories = std::move(best.left_categories);
    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : pending.rows) {
      (GoesLeft(node, x.at(r, best.feature)) ? left_rows : right_rows).push_back(r);
    }
    nodes.push_back(std::move(node));
    stack.push_back({std::move(right_rows), pending.depth + 1, index, false});
    stack.push_back({std::move(left_rows), pending.depth + 1, index, true});
  }
  return DecisionTree(params.criterion, std::move(nodes));
}

double RandomForest::Score(std::span<const double> row) const {
  double sum = 0.0;
  for (const DecisionTree& tree : trees_) sum += tree.Predict(row);
  return sum / static_cast<double>(trees_.size());
}

ScoreVector RandomForest::PredictScores(const FeatureMatrix& x) const {
  if (x.n_features() != n_features()) {
    throw Error(ErrorCode::kArityMismatch, fmt::format("model expects {} features, got {}",
                                                       n_features(), x.n_features()));
  }
  const auto n = static_cast<std::int64_t>(x.n_rows());
  ScoreVector scores(x.n_rows());
  const double n_trees = static_cast<double>(trees_.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    double sum = 0.0;
    for (const DecisionTree& tree : trees_) sum += tree.Predict(x, static_cast<std::size_t>(r));
    scores[static_cast<std::size_t>(r)] = sum / n_trees;
  }
  return scores;
}

nlohmann::json RandomForest::ToJson() const {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : features_) {
    nlohmann::json jf = {{"name", f.name},
                         {"kind", f.kind == tabular::FeatureKind::kNumeric ? "numeric"
                                                                           : "categorical"}};
    if (f.kind == tabular::FeatureKind::kCategorical) jf["categories"] = f.categories;
    features.push_back(std::move(jf));
  }
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.ToJson());
  return {{"format", "fairaudit.random_forest"},
          {"version", kModelVersion},
          {"feature_count", features_.size()},
          {"features", std::move(features)},
          {"config", config_.ToJson()},
          {"trees", std::move(trees)}};
}

RandomForest RandomForest::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "fairaudit.random_forest" ||
        j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::kBadModel, "unsupported model document");
    }
    std::vector<tabular::FeatureInfo> features;
    for (const auto& jf : j.at("features")) {
      tabular::FeatureInfo f;
      f.name = jf.at("name").get<std::string>();
      if (jf.at("kind").get<std::string>() == "categorical") {
        f.kind = tabular::FeatureKind::kCategorical;
        f.categories = jf.at("categories").get<std::vector<std::string>>();
      }
      features.push_back(std::move(f));
    }
    if (j.at("feature_count").get<std::size_t>() != features.size()) {
      throw Error(ErrorCode::kBadModel, "feature_count does not match features");
    }
    std::vector<DecisionTree> trees;
    for (const auto& jt : j.at("trees")) trees.push_back(DecisionTree::FromJson(jt));
    return RandomForest(ForestConfig::FromJson(j.at("config")), std::move(features),
                        std::move(trees));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadModel, e.what());
  }
}

std::string RandomForest::Hash() const { return Sha256Hex(Serialize()); }

namespace {

void CheckTrainingInputs(const FeatureMatrix& x, std::span<const std::uint8_t> labels,
                         std::span<const std::size_t> rows, const ForestConfig& config) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyTraining, "no training rows");
  if (x.n_features() == 0) throw Error(ErrorCode::kEmptyTraining, "no features");
  if (labels.size() != x.n_rows()) {
    throw Error(ErrorCode::kLengthMismatch, "labels must be indexed like the feature matrix");
  }
  if (config.n_trees == 0) throw Error(ErrorCode::kBadConfig, "n_trees must be >= 1");
  if (config.min_node_size == 0) throw Error(ErrorCode::kBadConfig, "min_node_size must be >= 1");
  if (config.mtry && (*config.mtry == 0 || *config.mtry > x.n_features())) {
    throw Error(ErrorCode::kBadConfig,
                fmt::format("mtry {} outside [1, {}]", *config.mtry, x.n_features()));
  }
  for (std::size_t r : rows) {
    if (r >= x.n_rows()) throw Error(ErrorCode::kLengthMismatch, "training row out of range");
  }
}

TreeParams ForestTreeParams(const FeatureMatrix& x, const ForestConfig& config) {
  TreeParams params;
  params.criterion = Criterion::kGini;
  params.min_node_size = config.min_node_size;
  params.max_depth = config.max_depth;
  params.mtry = config.mtry.value_or(std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.n_features()))))));
  return params;
}

DecisionTree TrainOne(const FeatureMatrix& x, std::span<const double> target,
                      std::span<const std::size_t> rows, const ForestConfig& config,
                      const TreeParams& params, std::size_t tree_index) {
  Rng rng(DeriveSeed(config.seed, tree_index));
  if (!config.bootstrap) return BuildTree(x, target, rows, params, rng);
  std::vector<std::size_t> sample(rows.size());
  for (auto& r : sample) r = rows[rng.Below(rows.size())];
  return BuildTree(x, target, sample, params, rng);
}

}  // namespace

RandomForest TrainForest(const FeatureMatrix& x, std::span<const std::uint8_t> labels,
                         std::span<const std::size_t> rows, const ForestConfig& config) {
  CheckTrainingInputs(x, labels, rows, config);
  const TreeParams params = ForestTreeParams(x, config);
  const std::vector<double> target(labels.begin(), labels.end());
  std::vector<DecisionTree> trees(config.n_trees);
  const auto n_trees = static_cast<std::int64_t>(config.n_trees);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < n_trees; ++t) {
    trees[static_cast<std::size_t>(t)] =
        TrainOne(x, target, rows, config, params, static_cast<std::size_t>(t));
  }
  return RandomForest(config, x.features(), std::move(trees));
}

namespace reference {

RandomForest TrainForest(const FeatureMatrix& x, std::span<const std::uint8_t> labels,
                         std::span<const std::size_t> rows, const ForestConfig& config) {
  CheckTrainingInputs(x, labels, rows, config);
  const TreeParams params = ForestTreeParams(x, config);
  const std::vector<double> target(labels.begin(), labels.end());
  std::vector<DecisionTree> trees;
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    trees.push_back(TrainOne(x, target, rows, config, params, t));
  }
  return RandomForest(config, x.features(), std::move(trees));
}

ScoreVector PredictScores(const RandomForest& forest, const FeatureMatrix& x) {
  if (x.n_features() != forest.n_features()) {
    throw Error(ErrorCode::kArityMismatch, "feature count mismatch");
  }
  ScoreVector scores;
  scores.reserve(x.n_rows());
  for (std::size_t r = 0; r < x.n_rows(); ++r) scores.push_back(forest.Score(x.Row(r)));
  return scores;
}

}  // namespace reference

ThresholdRule ThresholdRule::Parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kBadConfig,
                fmt::format("threshold '{}' must be fixed:T or top_q:Q", text));
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string number(text.substr(colon + 1));
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (ec != std::errc() || ptr != number.data() + number.size()) {
    throw Error(ErrorCode::kBadConfig, fmt::format("bad threshold value '{}'", number));
  }
  if (kind == "fixed") {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw Error(ErrorCode::kBadConfig, "fixed threshold must be in [0, 1]");
    }
    return Fixed(value);
  }
  if (kind == "top_q") {
    if (!(value > 0.0 && value < 1.0)) {
      throw Error(ErrorCode::kBadConfig, "top_q fraction must be in (0, 1)");
    }
    return TopQ(value);
  }
  throw Error(ErrorCode::kBadConfig, fmt::format("unknown threshold kind '{}'", kind));
}

std::string ThresholdRule::ToString() const {
  return fmt::format("{}:{}", kind == Kind::kFixed ? "fixed" : "top_q", value);
}

HardPredictions Classify(std::span<const double> scores, const ThresholdRule& rule) {
  HardPredictions out(scores.size(), 0);
  if (rule.kind == ThresholdRule::Kind::kFixed) {
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= rule.value ? 1 : 0;
    return out;
  }
  if (scores.empty()) throw Error(ErrorCode::kEmptyScores, "top_q needs at least one score");
  // ceil(q n) without picking up representation error in q (0.1 * 30 is
  // slightly above 3 in binary).
  const double exact = rule.value * static_cast<double>(scores.size());
  const auto k = std::min(scores.size(), static_cast<std::size_t>(std::ceil(exact - 1e-9)));
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (std::size_t i = 0; i < k; ++i) out[order[i]] = 1;
  return out;
}

std::vector<Decision> RejectOptionClassify(std::span<const double> scores, double lo, double hi) {
  if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
    throw Error(ErrorCode::kBadBand, fmt::format("band ({}, {}) is not within [0, 1]", lo, hi));
  }
  const double mid = lo + (hi - lo) / 2.0;
  std::vector<Decision> out;
  out.reserve(scores.size());
  for (double s : scores) {
    if (s >= lo && s <= hi) {
      out.push_back(Decision::kAbstain);
    } else {
      out.push_back(s >= mid ? Decision::kPositive : Decision::kNegative);
    }
  }
  return out;
}

}  // namespace fairaudit::forest
