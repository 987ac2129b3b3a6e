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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/forest.hpp"
#include "fairaudit/tabular.hpp"
#include "json.hpp"

namespace fairaudit::synthlab {

// Mechanism and bias knobs of one protected group.
struct GroupSpec {
  std::string name;
  double proportion = 1.0;
  std::vector<double> coefficients;   // latent weights, one per numeric feature
  double intercept = 0.0;
  std::vector<double> feature_shift;  // feature means (empty = all zero)
  double historical_bias = 0.0;       // additive shift of the latent score
  double label_proxy_flip = 0.0;      // measurement bias: observed-label flip probability
  double representation_undersample = 0.0;  // row drop probability
  std::vector<double> annotator_weights;    // allocation weights for group_biased
};

// Extra categorical attribute drawn independently of everything else; its
// per-category effects enter the latent score.
struct AttributeSpec {
  std::string name;
  std::vector<std::string> categories;
  std::vector<double> probabilities;
  std::vector<double> effects;  // empty = no effect
};

enum class FlipDirection { kSymmetric, kPositiveToNegative, kNegativeToPositive };
enum class AnnotatorPolicy { kRandom, kGroupBiased };

// Per-period multiplier on one knob: historical_bias, label_proxy_flip,
// representation_undersample or annotator_offsets.
struct DriftSchedule {
  std::string knob;
  std::vector<double> multipliers;
};

struct SynthConfig {
  std::size_t n_per_period = 1000;  // rows drawn before undersampling
  std::size_t periods = 1;
  std::int64_t first_period = 0;
  std::size_t n_features = 3;
  std::string group_column = "group";
  std::string label_column = "y";
  std::vector<GroupSpec> groups;
  std::vector<AttributeSpec> attributes;
  // Scale of the logistic latent noise; 0 makes the label 1[latent > 0].
  double noise_sigma = 1.0;
  FlipDirection flip_direction = FlipDirection::kSymmetric;
  // Directional propensity per annotator: +o flips observed 0 to 1 with
  // probability o, -o flips 1 to 0 with probability o.
  std::vector<double> annotator_offsets;
  AnnotatorPolicy annotator_policy = AnnotatorPolicy::kRandom;
  bool annotator_as_feature = false;
  std::vector<DriftSchedule> drift;
  std::uint64_t seed = 0;

  static SynthConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  // Throws BadConfig.
  void Validate() const;
  bool KnobsOff() const;
  double Multiplier(std::string_view knob, std::size_t period_index) const;
};

struct GroundTruth {
  double noise_sigma = 1.0;
  // Per generated row.
  std::vector<std::uint8_t> true_labels;
  std::vector<double> true_probability;  // P(Y = 1 | x, group) before bias knobs
  std::vector<std::int32_t> groups;
  std::vector<std::int32_t> annotators;  // -1 when there is no annotator pool
  std::vector<std::size_t> period_index;
};

struct Generated {
  tabular::Dataset data;
  GroundTruth truth;
};

// P(Y = 1) for a latent score under noise scale sigma.
double TrueProbability(double latent, double sigma);

// Pipeline per row: group, features, latent score, true label, measurement
// flip, annotator flip, undersampling. Columns: row_id, period, group,
// x1..xp, attributes, optional annotator, label. Pure in (config).
Generated Generate(const SynthConfig& config);
// Schema of the generated table.
tabular::Schema GeneratedSchema(const SynthConfig& config);

using Predictor = std::function<double(std::span<const double>)>;
using Learner = std::function<Predictor(const tabular::FeatureMatrix& x,
                                        std::span<const std::uint8_t> labels,
                                        std::uint64_t seed)>;

Learner ForestLearner(const forest::ForestConfig& config);
Learner ConstantLearner(double value);
// Predicts the training base rate.
Learner ConstantMeanLearner();

struct BiasVarianceOptions {
  std::size_t replications = 200;
  std::size_t n_train = 500;
  std::size_t n_noise_draws = 200;
  std::uint64_t seed = 0;
};

struct BiasVariancePoint {
  std::vector<double> x0;
  double truth = 0.0;            // f(x0)
  double noise = 0.0;            // Var(Y | x0) = f (1 - f), analytic
  double mean_prediction = 0.0;
  double bias2 = 0.0;
  double variance = 0.0;
  double espe = 0.0;             // from fresh Y draws
  double espe_se = 0.0;
  double bias2_se = 0.0;
  double variance_se = 0.0;
  double residual = 0.0;         // espe - (noise + bias2 + variance)
  double residual_se = 0.0;
  bool identity_holds = false;   // |residual| <= 3 residual_se
};

struct BiasVarianceReport {
  std::size_t replications = 0;
  std::size_t n_train = 0;
  std::size_t n_noise_draws = 0;
  std::vector<BiasVariancePoint> points;

  double IdentityPassRate() const;
  double MeanBias2() const;
  double MeanVariance() const;
};

// Monte-Carlo decomposition of the expected squared prediction error at each
// grid point. Needs a clean single-mechanism DGP (knobs off, groups sharing
// one mechanism, no attributes). Replications run in parallel on derived
// streams. Throws BadConfig, TooFewReplications.
BiasVarianceReport DecomposeBiasVariance(const Learner& learner, const SynthConfig& config,
                                         std::span<const std::vector<double>> grid,
                                         const BiasVarianceOptions& options);

// f(x) for the clean DGP used by DecomposeBiasVariance.
double CleanConditionalMean(const SynthConfig& config, std::span<const double> x);

}  // namespace fairaudit::synthlab
