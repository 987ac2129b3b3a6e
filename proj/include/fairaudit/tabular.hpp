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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace fairaudit::tabular {

enum class Role {
  kNumericFeature,
  kCategoricalFeature,
  kLabel,
  kProtected,
  kTime,
  kId,
};

std::string_view RoleName(Role role);
Role ParseRole(std::string_view name);

struct ColumnSpec {
  std::string name;
  Role role = Role::kNumericFeature;
  // Category strings in code order; only for categorical, protected and
  // label columns.
  std::vector<std::string> categories;

  bool IsCategorical() const {
    return role == Role::kCategoricalFeature || role == Role::kProtected ||
           role == Role::kLabel;
  }
  bool operator==(const ColumnSpec&) const = default;
};

// Column roles for one dataset. Exactly one binary label column; its second
// category is the positive class (code 1).
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnSpec> columns);

  static Schema FromJson(const nlohmann::json& manifest);
  static Schema LoadManifest(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const ColumnSpec& column(std::size_t index) const { return columns_.at(index); }
  std::size_t size() const { return columns_.size(); }

  std::optional<std::size_t> Find(std::string_view name) const;
  // Throws UnknownColumn.
  std::size_t IndexOf(std::string_view name) const;
  std::optional<std::int32_t> CategoryCode(std::size_t column,
                                           std::string_view category) const;

  std::size_t label_index() const { return label_index_; }
  std::optional<std::size_t> time_index() const { return time_index_; }
  // Numeric and categorical feature columns, in schema order.
  std::vector<std::size_t> FeatureIndices() const;
  std::vector<std::size_t> ProtectedIndices() const;

  bool operator==(const Schema& other) const { return columns_ == other.columns_; }

 private:
  std::vector<ColumnSpec> columns_;
  std::size_t label_index_ = 0;
  std::optional<std::size_t> time_index_;
};

// Storage per role: numeric -> double, categorical/protected/label -> code,
// time -> period, id -> string.
using ColumnData = std::variant<std::vector<double>, std::vector<std::int32_t>,
                                std::vector<std::int64_t>, std::vector<std::string>>;

// Immutable column-major table.
class Dataset {
 public:
  Dataset() = default;
  // Checks storage types and lengths. Category codes are not range checked
  // here; see Validate.
  Dataset(Schema schema, std::vector<ColumnData> columns);

  const Schema& schema() const { return schema_; }
  std::size_t n_rows() const { return n_rows_; }

  std::span<const double> numeric(std::size_t column) const;
  std::span<const std::int32_t> codes(std::size_t column) const;
  std::span<const std::int64_t> periods(std::size_t column) const;
  std::span<const std::string> ids(std::size_t column) const;
  const ColumnData& data(std::size_t column) const { return columns_.at(column); }

  std::span<const std::int32_t> codes(std::string_view name) const {
    return codes(schema_.IndexOf(name));
  }

  // Label column as 0/1.
  std::vector<std::uint8_t> Labels() const;
  std::vector<std::uint8_t> Labels(std::span<const std::size_t> rows) const;

  Dataset Subset(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset& other) const = default;

 private:
  Schema schema_;
  std::vector<ColumnData> columns_;
  std::size_t n_rows_ = 0;
};

Dataset ReadCsv(std::istream& in, const Schema& schema);
Dataset LoadCsv(const std::filesystem::path& path, const Schema& schema);
// Writes all schema columns in schema order; doubles use shortest round-trip
// formatting, so ReadCsv(WriteCsv(ds)) == ds.
void WriteCsv(const Dataset& ds, std::ostream& out);
void SaveCsv(const Dataset& ds, const std::filesystem::path& path);

struct Issue {
  std::string code;  // "category_out_of_range", "non_finite"
  std::string column;
  std::size_t row = 0;
  bool operator==(const Issue&) const = default;
};

// Empty iff every value invariant holds. Issues are ordered by column (schema
// order) then row.
std::vector<Issue> Validate(const Dataset& ds);

enum class SplitStrategy { kRandom, kStratified, kTemporal };

struct SplitPlan {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> eval;   // ascending
  std::uint64_t seed = 0;
  SplitStrategy strategy = SplitStrategy::kRandom;
  std::string stratify_by;
  std::vector<std::int64_t> train_periods;
  std::vector<std::int64_t> eval_periods;
  bool operator==(const SplitPlan&) const = default;
};

// |train| = round(train_fraction * n). With stratification the train count of
// every stratum is within 1 of train_fraction * stratum size (largest
// remainder apportionment).
SplitPlan SplitRandom(const Dataset& ds, double train_fraction, std::uint64_t seed,
                      const std::optional<std::string>& stratify_by = std::nullopt);

// Plain index version used by modules that split row subsets.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> SplitIndices(
    std::span<const std::size_t> rows, double train_fraction, std::uint64_t seed);

struct TimeSlice {
  std::int64_t period = 0;
  std::vector<std::size_t> rows;
};

// Ascending periods; the slices partition all rows. Throws NoTimeColumn.
std::vector<TimeSlice> SliceByTime(const Dataset& ds);

SplitPlan SplitTemporal(const Dataset& ds, std::span<const std::int64_t> train_periods,
                        std::span<const std::int64_t> eval_periods);

enum class FeatureKind { kNumeric, kCategorical };

struct FeatureInfo {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  std::vector<std::string> categories;
  bool operator==(const FeatureInfo&) const = default;
};

// Dense column-major model input. Categorical values are stored as their
// integer code.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<FeatureInfo> features, std::size_t n_rows);

  // Model features of the schema (numeric and categorical feature roles).
  static FeatureMatrix FromDataset(const Dataset& ds);
  // Arbitrary columns; protected/label columns become categorical features,
  // time becomes numeric. Id columns are rejected.
  static FeatureMatrix FromDataset(const Dataset& ds, std::span<const std::size_t> columns);
  // Columns looked up by name, e.g. the features a trained model expects.
  static FeatureMatrix FromDataset(const Dataset& ds, std::span<const FeatureInfo> features);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return features_.size(); }
  const std::vector<FeatureInfo>& features() const { return features_; }

  double at(std::size_t row, std::size_t feature) const {
    return values_[feature * n_rows_ + row];
  }
  void set(std::size_t row, std::size_t feature, double value) {
    values_[feature * n_rows_ + row] = value;
  }
  std::span<const double> column(std::size_t feature) const {
    return {values_.data() + feature * n_rows_, n_rows_};
  }
  std::vector<double> Row(std::size_t row) const;

 private:
  std::vector<FeatureInfo> features_;
  std::size_t n_rows_ = 0;
  std::vector<double> values_;
};

}  // namespace fairaudit::tabular
