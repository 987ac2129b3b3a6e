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

#include "fairaudit/synthlab.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairaudit/common.hpp"
#include "fairaudit/random.hpp"

namespace fairaudit::synthlab {

namespace {

constexpr std::string_view kKnobs[] = {"historical_bias", "label_proxy_flip",
                                       "representation_undersample", "annotator_offsets"};

std::size_t DrawIndex(std::span<const double> weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double u = rng.Uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

double Clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

std::string_view FlipName(FlipDirection d) {
  switch (d) {
    case FlipDirection::kSymmetric: return "symmetric";
    case FlipDirection::kPositiveToNegative: return "positive_to_negative";
    case FlipDirection::kNegativeToPositive: return "negative_to_positive";
  }
  return "symmetric";
}

FlipDirection ParseFlip(std::string_view s) {
  for (auto d : {FlipDirection::kSymmetric, FlipDirection::kPositiveToNegative,
                 FlipDirection::kNegativeToPositive}) {
    if (FlipName(d) == s) return d;
  }
  throw Error(ErrorCode::kBadConfig, fmt::format("unknown flip_direction '{}'", s));
}

double Latent(const SynthConfig& config, const GroupSpec& g, std::span<const double> x) {
  double latent = g.intercept;
  for (std::size_t j = 0; j < config.n_features; ++j) latent += g.coefficients[j] * x[j];
  return latent;
}

double Mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard error of the mean of v.
double MeanSe(std::span<const double> v) {
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

}  // namespace

double TrueProbability(double latent, double sigma) {
  if (sigma <= 0.0) return latent > 0.0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-latent / sigma));
}

SynthConfig SynthConfig::FromJson(const nlohmann::json& j) {
  SynthConfig c;
  try {
    c.n_per_period = j.value("n_per_period", c.n_per_period);
    c.periods = j.value("periods", c.periods);
    c.first_period = j.value("first_period", c.first_period);
    c.n_features = j.value("n_features", c.n_features);
    c.group_column = j.value("group_column", c.group_column);
    c.label_column = j.value("label_column", c.label_column);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.seed = j.value("seed", c.seed);
    if (j.contains("flip_direction")) c.flip_direction = ParseFlip(j["flip_direction"].get<std::string>());
    for (const auto& jg : j.at("groups")) {
      GroupSpec g;
      g.name = jg.at("name").get<std::string>();
      g.proportion = jg.value("proportion", 1.0);
      g.coefficients = jg.value("coefficients", std::vector<double>{});
      g.intercept = jg.value("intercept", 0.0);
      g.feature_shift = jg.value("feature_shift", std::vector<double>{});
      g.historical_bias = jg.value("historical_bias", 0.0);
      g.label_proxy_flip = jg.value("label_proxy_flip", 0.0);
      g.representation_undersample = jg.value("representation_undersample", 0.0);
      g.annotator_weights = jg.value("annotator_weights", std::vector<double>{});
      c.groups.push_back(std::move(g));
    }
    if (j.contains("attributes")) {
      for (const auto& ja : j["attributes"]) {
        AttributeSpec a;
        a.name = ja.at("name").get<std::string>();
        a.categories = ja.at("categories").get<std::vector<std::string>>();
        a.probabilities = ja.value("probabilities", std::vector<double>{});
        a.effects = ja.value("effects", std::vector<double>{});
        c.attributes.push_back(std::move(a));
      }
    }
    if (j.contains("annotators")) {
      const auto& ja = j["annotators"];
      c.annotator_offsets = ja.value("offsets", std::vector<double>{});
      const std::string policy = ja.value("policy", std::string("random"));
      if (policy == "random") {
        c.annotator_policy = AnnotatorPolicy::kRandom;
      } else if (policy == "group_biased") {
        c.annotator_policy = AnnotatorPolicy::kGroupBiased;
      } else {
        throw Error(ErrorCode::kBadConfig, "unknown annotator policy " + policy);
      }
      c.annotator_as_feature = ja.value("as_feature", false);
    }
    if (j.contains("drift")) {
      for (const auto& jd : j["drift"]) {
        c.drift.push_back({jd.at("knob").get<std::string>(),
                           jd.at("multipliers").get<std::vector<double>>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadConfig, e.what());
  }
  for (auto& g : c.groups) {
    if (g.coefficients.empty()) g.coefficients.assign(c.n_features, 0.0);
  }
  c.Validate();
  return c;
}

nlohmann::json SynthConfig::ToJson() const {
  nlohmann::json groups_json = nlohmann::json::array();
  for (const auto& g : groups) {
    groups_json.push_back({{"name", g.name},
                           {"proportion", g.proportion},
                           {"coefficients", g.coefficients},
                           {"intercept", g.intercept},
                           {"feature_shift", g.feature_shift},
                           {"historical_bias", g.historical_bias},
                           {"label_proxy_flip", g.label_proxy_flip},
                           {"representation_undersample", g.representation_undersample},
                           {"annotator_weights", g.annotator_weights}});
  }
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : attributes) {
    attrs.push_back({{"name", a.name},
                     {"categories", a.categories},
                     {"probabilities", a.probabilities},
                     {"effects", a.effects}});
  }
  nlohmann::json drift_json = nlohmann::json::array();
  for (const auto& d : drift) drift_json.push_back({{"knob", d.knob}, {"multipliers", d.multipliers}});
  return {{"n_per_period", n_per_period},
          {"periods", periods},
          {"first_period", first_period},
          {"n_features", n_features},
          {"group_column", group_column},
          {"label_column", label_column},
          {"groups", std::move(groups_json)},
          {"attributes", std::move(attrs)},
          {"noise_sigma", noise_sigma},
          {"flip_direction", std::string(FlipName(flip_direction))},
          {"annotators",
           {{"offsets", annotator_offsets},
            {"policy", annotator_policy == AnnotatorPolicy::kRandom ? "random" : "group_biased"},
            {"as_feature", annotator_as_feature}}},
          {"drift", std::move(drift_json)},
          {"seed", seed}};
}

void SynthConfig::Validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kBadConfig, why); };
  auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (groups.empty()) fail("at least one group is required");
  if (periods == 0) fail("periods must be >= 1");
  if (n_features == 0) fail("n_features must be >= 1");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  double total = 0.0;
  for (const auto& g : groups) {
    if (!(g.proportion >= 0.0)) fail("group proportions must be >= 0");
    total += g.proportion;
    if (g.coefficients.size() != n_features) {
      fail(fmt::format("group '{}' needs {} coefficients", g.name, n_features));
    }
    if (!g.feature_shift.empty() && g.feature_shift.size() != n_features) {
      fail(fmt::format("group '{}' feature_shift needs {} entries", g.name, n_features));
    }
    if (!is_prob(g.label_proxy_flip) || !is_prob(g.representation_undersample)) {
      fail(fmt::format("group '{}' probabilities must be in [0, 1]", g.name));
    }
    if (annotator_policy == AnnotatorPolicy::kGroupBiased && !annotator_offsets.empty() &&
        g.annotator_weights.size() != annotator_offsets.size()) {
      fail(fmt::format("group '{}' needs one annotator weight per annotator", g.name));
    }
    for (double w : g.annotator_weights) {
      if (!(w >= 0.0)) fail("annotator weights must be >= 0");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) fail("group proportions must sum to 1");
  for (double o : annotator_offsets) {
    if (!(std::abs(o) <= 1.0)) fail("annotator offsets must be in [-1, 1]");
  }
  for (const auto& a : attributes) {
    if (a.categories.empty()) fail(fmt::format("attribute '{}' has no categories", a.name));
    if (!a.probabilities.empty() && a.probabilities.size() != a.categories.size()) {
      fail(fmt::format("attribute '{}' probabilities do not match its categories", a.name));
    }
    if (!a.effects.empty() && a.effects.size() != a.categories.size()) {
      fail(fmt::format("attribute '{}' effects do not match its categories", a.name));
    }
  }
  for (const auto& d : drift) {
    if (std::find(std::begin(kKnobs), std::end(kKnobs), d.knob) == std::end(kKnobs)) {
      fail(fmt::format("unknown drift knob '{}'", d.knob));
    }
    if (d.multipliers.size() != periods) {
      fail(fmt::format("drift schedule for '{}' needs {} multipliers", d.knob, periods));
    }
  }
}

bool SynthConfig::KnobsOff() const {
  for (const auto& g : groups) {
    if (g.historical_bias != 0.0 || g.label_proxy_flip != 0.0 ||
        g.representation_undersample != 0.0) {
      return false;
    }
  }
  return std::all_of(annotator_offsets.begin(), annotator_offsets.end(),
                     [](double o) { return o == 0.0; });
}

double SynthConfig::Multiplier(std::string_view knob, std::size_t period_index) const {
  double m = 1.0;
  for (const auto& d : drift) {
    if (d.knob == knob) m *= d.multipliers.at(period_index);
  }
  return m;
}

tabular::Schema GeneratedSchema(const SynthConfig& config) {
  using tabular::ColumnSpec;
  using tabular::Role;
  std::vector<ColumnSpec> cols;
  cols.push_back({"row_id", Role::kId, {}});
  cols.push_back({"period", Role::kTime, {}});
  std::vector<std::string> group_names;
  for (const auto& g : config.groups) group_names.push_back(g.name);
  cols.push_back({config.group_column, Role::kProtected, group_names});
  for (std::size_t j = 0; j < config.n_features; ++j) {
    cols.push_back({fmt::format("x{}", j + 1), Role::kNumericFeature, {}});
  }
  for (const auto& a : config.attributes) {
    cols.push_back({a.name, Role::kCategoricalFeature, a.categories});
  }
  if (config.annotator_as_feature && !config.annotator_offsets.empty()) {
    std::vector<std::string> ids;
    for (std::size_t a = 0; a < config.annotator_offsets.size(); ++a) {
      ids.push_back(fmt::format("ann{}", a));
    }
    cols.push_back({"annotator", Role::kCategoricalFeature, ids});
  }
  cols.push_back({config.label_column, Role::kLabel, {"0", "1"}});
  return tabular::Schema(std::move(cols));
}

Generated Generate(const SynthConfig& config) {
  config.Validate();
  const tabular::Schema schema = GeneratedSchema(config);
  const std::size_t p = config.n_features;
  const bool annotator_column = config.annotator_as_feature && !config.annotator_offsets.empty();

  std::vector<std::string> ids;
  std::vector<std::int64_t> periods;
  std::vector<std::int32_t> groups;
  std::vector<std::vector<double>> features(p);
  std::vector<std::vector<std::int32_t>> attributes(config.attributes.size());
  std::vector<std::int32_t> annotator_codes;
  std::vector<std::int32_t> labels;
  GroundTruth truth;
  truth.noise_sigma = config.noise_sigma;

  std::vector<double> proportions;
  for (const auto& g : config.groups) proportions.push_back(g.proportion);
  std::vector<double> x(p);

  for (std::size_t t = 0; t < config.periods; ++t) {
    Rng rng(DeriveSeed(config.seed, t));
    const double m_hist = config.Multiplier("historical_bias", t);
    const double m_flip = config.Multiplier("label_proxy_flip", t);
    const double m_under = config.Multiplier("representation_undersample", t);
    const double m_ann = config.Multiplier("annotator_offsets", t);
    for (std::size_t i = 0; i < config.n_per_period; ++i) {
      const std::size_t gi = DrawIndex(proportions, rng);
      const GroupSpec& g = config.groups[gi];
      for (std::size_t j = 0; j < p; ++j) {
        x[j] = (g.feature_shift.empty() ? 0.0 : g.feature_shift[j]) + rng.Normal();
      }
      double latent = Latent(config, g, x) + g.historical_bias * m_hist;
      std::vector<std::int32_t> attr_codes;
      for (const auto& a : config.attributes) {
        const std::size_t c = a.probabilities.empty() ? rng.Below(a.categories.size())
                                                      : DrawIndex(a.probabilities, rng);
        attr_codes.push_back(static_cast<std::int32_t>(c));
        if (!a.effects.empty()) latent += a.effects[c];
      }
      const double noise = config.noise_sigma > 0.0 ? config.noise_sigma * rng.Logistic() : 0.0;
      const std::uint8_t true_label = latent + noise > 0.0 ? 1 : 0;

      std::uint8_t observed = true_label;
      const double flip = Clamp01(g.label_proxy_flip * m_flip);
      const double u_flip = rng.Uniform();
      if (u_flip < flip) {
        switch (config.flip_direction) {
          case FlipDirection::kSymmetric: observed = 1 - observed; break;
          case FlipDirection::kPositiveToNegative: observed = 0; break;
          case FlipDirection::kNegativeToPositive: observed = 1; break;
        }
      }

      std::int32_t annotator = -1;
      if (!config.annotator_offsets.empty()) {
        const std::size_t a =
            config.annotator_policy == AnnotatorPolicy::kGroupBiased
                ? DrawIndex(g.annotator_weights, rng)
                : rng.Below(config.annotator_offsets.size());
        annotator = static_cast<std::int32_t>(a);
        const double offset = config.annotator_offsets[a] * m_ann;
        const double u_ann = rng.Uniform();
        if (offset > 0.0 && observed == 0 && u_ann < offset) observed = 1;
        if (offset < 0.0 && observed == 1 && u_ann < -offset) observed = 0;
      }

      const double drop = Clamp01(g.representation_undersample * m_under);
      if (rng.Uniform() < drop) continue;

      ids.push_back(fmt::format("p{}r{}", t, i));
      periods.push_back(config.first_period + static_cast<std::int64_t>(t));
      groups.push_back(static_cast<std::int32_t>(gi));
      for (std::size_t j = 0; j < p; ++j) features[j].push_back(x[j]);
      for (std::size_t a = 0; a < attr_codes.size(); ++a) attributes[a].push_back(attr_codes[a]);
      if (annotator_column) annotator_codes.push_back(annotator);
      labels.push_back(observed);

      truth.true_labels.push_back(true_label);
      truth.true_probability.push_back(TrueProbability(latent, config.noise_sigma));
      truth.groups.push_back(static_cast<std::int32_t>(gi));
      truth.annotators.push_back(annotator);
      truth.period_index.push_back(t);
    }
  }

  std::vector<tabular::ColumnData> columns;
  columns.emplace_back(std::move(ids));
  columns.emplace_back(std::move(periods));
  columns.emplace_back(std::move(groups));
  for (auto& f : features) columns.emplace_back(std::move(f));
  for (auto& a : attributes) columns.emplace_back(std::move(a));
  if (annotator_column) columns.emplace_back(std::move(annotator_codes));
  columns.emplace_back(std::move(labels));
  return {tabular::Dataset(schema, std::move(columns)), std::move(truth)};
}

Learner ForestLearner(const forest::ForestConfig& config) {
  return [config](const tabular::FeatureMatrix& x, std::span<const std::uint8_t> labels,
                  std::uint64_t seed) -> Predictor {
    forest::ForestConfig c = config;
    c.seed = seed;
    std::vector<std::size_t> rows(x.n_rows());
    std::iota(rows.begin(), rows.end(), 0);
    auto model = std::make_shared<forest::RandomForest>(forest::TrainForest(x, labels, rows, c));
    return [model](std::span<const double> row) { return model->Score(row); };
  };
}

Learner ConstantLearner(double value) {
  return [value](const tabular::FeatureMatrix&, std::span<const std::uint8_t>,
                 std::uint64_t) -> Predictor {
    return [value](std::span<const double>) { return value; };
  };
}

Learner ConstantMeanLearner() {
  return [](const tabular::FeatureMatrix&, std::span<const std::uint8_t> labels,
            std::uint64_t) -> Predictor {
    const double mean =
        labels.empty() ? 0.0
                       : static_cast<double>(std::accumulate(labels.begin(), labels.end(), 0u)) /
                             static_cast<double>(labels.size());
    return [mean](std::span<const double>) { return mean; };
  };
}

double CleanConditionalMean(const SynthConfig& config, std::span<const double> x) {
  return TrueProbability(Latent(config, config.groups.front(), x), config.noise_sigma);
}

double BiasVarianceReport::IdentityPassRate() const {
  if (points.empty()) return 0.0;
  const auto pass = std::count_if(points.begin(), points.end(),
                                  [](const BiasVariancePoint& p) { return p.identity_holds; });
  return static_cast<double>(pass) / static_cast<double>(points.size());
}

double BiasVarianceReport::MeanBias2() const {
  double s = 0.0;
  for (const auto& p : points) s += p.bias2;
  return points.empty() ? 0.0 : s / static_cast<double>(points.size());
}

double BiasVarianceReport::MeanVariance() const {
  double s = 0.0;
  for (const auto& p : points) s += p.variance;
  return points.empty() ? 0.0 : s / static_cast<double>(points.size());
}

BiasVarianceReport DecomposeBiasVariance(const Learner& learner, const SynthConfig& config,
                                         std::span<const std::vector<double>> grid,
                                         const BiasVarianceOptions& options) {
  config.Validate();
  if (options.replications < 30) {
    throw Error(ErrorCode::kTooFewReplications,
                fmt::format("{} replications < 30", options.replications));
  }
  if (!config.KnobsOff()) {
    throw Error(ErrorCode::kBadConfig, "the decomposition needs all bias knobs off");
  }
  const GroupSpec& first = config.groups.front();
  for (const auto& g : config.groups) {
    if (g.coefficients != first.coefficients || g.intercept != first.intercept ||
        g.feature_shift != first.feature_shift) {
      throw Error(ErrorCode::kBadConfig, "groups must share one mechanism");
    }
  }
  if (!config.attributes.empty() ||
      (config.annotator_as_feature && !config.annotator_offsets.empty())) {
    throw Error(ErrorCode::kBadConfig, "only numeric features are supported");
  }
  if (options.n_train == 0 || options.n_noise_draws == 0 || grid.empty()) {
    throw Error(ErrorCode::kBadConfig, "n_train, n_noise_draws and the grid must be non-empty");
  }
  for (const auto& x0 : grid) {
    if (x0.size() != config.n_features) {
      throw Error(ErrorCode::kArityMismatch, "grid point dimension differs from n_features");
    }
  }

  const std::size_t m_count = options.replications;
  const std::size_t g_count = grid.size();
  std::vector<double> truth(g_count);
  for (std::size_t g = 0; g < g_count; ++g) truth[g] = CleanConditionalMean(config, grid[g]);

  // predictions[m * G + g] and per-replication squared errors.
  std::vector<double> predictions(m_count * g_count);
  std::vector<double> sq_error(m_count * g_count);
  const auto reps = static_cast<std::int64_t>(m_count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t m = 0; m < reps; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    SynthConfig draw = config;
    draw.periods = 1;
    draw.drift.clear();
    draw.n_per_period = options.n_train;
    draw.seed = DeriveSeed(options.seed, 2 * mi);
    const Generated data = Generate(draw);
    const auto x = tabular::FeatureMatrix::FromDataset(data.data);
    const auto labels = data.data.Labels();
    const Predictor f_hat = learner(x, labels, DeriveSeed(options.seed, 2 * mi + 1));
    Rng noise_rng(DeriveSeed(options.seed ^ 0x5bd1e995ULL, mi));
    for (std::size_t g = 0; g < g_count; ++g) {
      const double pred = f_hat(grid[g]);
      predictions[mi * g_count + g] = pred;
      double acc = 0.0;
      for (std::size_t d = 0; d < options.n_noise_draws; ++d) {
        const double y = noise_rng.Uniform() < truth[g] ? 1.0 : 0.0;
        acc += (y - pred) * (y - pred);
      }
      sq_error[mi * g_count + g] = acc / static_cast<double>(options.n_noise_draws);
    }
  }

  BiasVarianceReport report;
  report.replications = m_count;
  report.n_train = options.n_train;
  report.n_noise_draws = options.n_noise_draws;
  std::vector<double> preds(m_count), errs(m_count), resid(m_count), dev2(m_count);
  for (std::size_t g = 0; g < g_count; ++g) {
    BiasVariancePoint pt;
    pt.x0 = grid[g];
    pt.truth = truth[g];
    pt.noise = truth[g] * (1.0 - truth[g]);
    for (std::size_t m = 0; m < m_count; ++m) {
      preds[m] = predictions[m * g_count + g];
      errs[m] = sq_error[m * g_count + g];
    }
    pt.mean_prediction = Mean(preds);
    const double bias = pt.mean_prediction - pt.truth;
    pt.bias2 = bias * bias;
    for (std::size_t m = 0; m < m_count; ++m) {
      dev2[m] = (preds[m] - pt.mean_prediction) * (preds[m] - pt.mean_prediction);
      resid[m] = errs[m] - pt.noise - (pt.truth - preds[m]) * (pt.truth - preds[m]);
    }
    pt.variance = Mean(dev2);
    pt.espe = Mean(errs);
    pt.espe_se = MeanSe(errs);
    pt.variance_se = MeanSe(dev2);
    pt.bias2_se = 2.0 * std::abs(bias) * std::sqrt(pt.variance / static_cast<double>(m_count));
    pt.residual = pt.espe - (pt.noise + pt.bias2 + pt.variance);
    pt.residual_se = MeanSe(resid);
    pt.identity_holds = std::abs(pt.residual) <= 3.0 * pt.residual_se + 1e-12;
    report.points.push_back(std::move(pt));
  }
  return report;
}

}  // namespace fairaudit::synthlab
