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

#include "fairaudit/tabular.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "fairaudit/common.hpp"
#include "fairaudit/random.hpp"

namespace fairaudit::tabular {

namespace {

constexpr std::pair<Role, std::string_view> kRoleNames[] = {
    {Role::kNumericFeature, "numeric_feature"},
    {Role::kCategoricalFeature, "categorical_feature"},
    {Role::kLabel, "label"},
    {Role::kProtected, "protected"},
    {Role::kTime, "time"},
    {Role::kId, "id"},
};

// RFC-4180 record reader. Returns false at end of input.
bool ReadRecord(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      break;
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorCode::kBadCell, "unterminated quoted field");
  if (any) fields.push_back(std::move(field));
  return any;
}

std::string QuoteCsv(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <typename T>
bool ParseNumber(std::string_view text, T& value) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::size_t ColumnLength(const ColumnData& data) {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

}  // namespace

std::string_view RoleName(Role role) {
  for (const auto& [r, name] : kRoleNames) {
    if (r == role) return name;
  }
  return "unknown";
}

Role ParseRole(std::string_view name) {
  for (const auto& [r, n] : kRoleNames) {
    if (n == name) return r;
  }
  throw Error(ErrorCode::kBadSchema, fmt::format("unknown role '{}'", name));
}

Schema::Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
  std::set<std::string> names;
  std::optional<std::size_t> label;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const ColumnSpec& col = columns_[i];
    if (!names.insert(col.name).second) {
      throw Error(ErrorCode::kBadSchema, fmt::format("duplicate column '{}'", col.name));
    }
    std::set<std::string> cats(col.categories.begin(), col.categories.end());
    if (cats.size() != col.categories.size()) {
      throw Error(ErrorCode::kBadSchema,
                  fmt::format("duplicate category in column '{}'", col.name));
    }
    if (col.IsCategorical() && col.categories.empty()) {
      throw Error(ErrorCode::kBadSchema,
                  fmt::format("column '{}' needs a category list", col.name));
    }
    if (!col.IsCategorical() && !col.categories.empty()) {
      throw Error(ErrorCode::kBadSchema,
                  fmt::format("column '{}' cannot carry categories", col.name));
    }
    if (col.role == Role::kLabel) {
      if (label) {
        throw Error(ErrorCode::kRoleConflict,
                    fmt::format("two label columns: '{}' and '{}'", columns_[*label].name,
                                col.name));
      }
      if (col.categories.size() != 2) {
        throw Error(ErrorCode::kBadSchema,
                    fmt::format("label '{}' must have exactly 2 categories", col.name));
      }
      label = i;
    }
    if (col.role == Role::kTime) {
      if (time_index_) {
        throw Error(ErrorCode::kRoleConflict, "more than one time column");
      }
      time_index_ = i;
    }
  }
  if (!label) throw Error(ErrorCode::kBadSchema, "schema has no label column");
  label_index_ = *label;
}

Schema Schema::FromJson(const nlohmann::json& manifest) {
  if (!manifest.is_object() || !manifest.contains("columns") ||
      !manifest["columns"].is_array()) {
    throw Error(ErrorCode::kBadSchema, "manifest must be {\"columns\": [...]}");
  }
  std::vector<ColumnSpec> columns;
  for (const auto& entry : manifest["columns"]) {
    ColumnSpec spec;
    try {
      spec.name = entry.at("name").get<std::string>();
      spec.role = ParseRole(entry.at("role").get<std::string>());
      if (entry.contains("categories")) {
        spec.categories = entry["categories"].get<std::vector<std::string>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kBadSchema, e.what());
    }
    columns.push_back(std::move(spec));
  }
  return Schema(std::move(columns));
}

Schema Schema::LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadSchema, e.what());
  }
  return FromJson(manifest);
}

nlohmann::json Schema::ToJson() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const ColumnSpec& col : columns_) {
    nlohmann::json entry = {{"name", col.name}, {"role", std::string(RoleName(col.role))}};
    if (col.IsCategorical()) entry["categories"] = col.categories;
    cols.push_back(std::move(entry));
  }
  return {{"columns", cols}};
}

std::optional<std::size_t> Schema::Find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::IndexOf(std::string_view name) const {
  if (auto index = Find(name)) return *index;
  throw Error(ErrorCode::kUnknownColumn, fmt::format("no column '{}'", name));
}

std::optional<std::int32_t> Schema::CategoryCode(std::size_t column,
                                                 std::string_view category) const {
  const auto& cats = columns_.at(column).categories;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (cats[i] == category) return static_cast<std::int32_t>(i);
  }
  return std::nullopt;
}

std::vector<std::size_t> Schema::FeatureIndices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].role == Role::kNumericFeature ||
        columns_[i].role == Role::kCategoricalFeature) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<std::size_t> Schema::ProtectedIndices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].role == Role::kProtected) out.push_back(i);
  }
  return out;
}

Dataset::Dataset(Schema schema, std::vector<ColumnData> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size()) {
    throw Error(ErrorCode::kBadSchema, "column count does not match schema");
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const ColumnSpec& spec = schema_.column(i);
    bool ok = false;
    switch (spec.role) {
      case Role::kNumericFeature:
        ok = std::holds_alternative<std::vector<double>>(columns_[i]);
        break;
      case Role::kCategoricalFeature:
      case Role::kProtected:
      case Role::kLabel:
        ok = std::holds_alternative<std::vector<std::int32_t>>(columns_[i]);
        break;
      case Role::kTime:
        ok = std::holds_alternative<std::vector<std::int64_t>>(columns_[i]);
        break;
      case Role::kId:
        ok = std::holds_alternative<std::vector<std::string>>(columns_[i]);
        break;
    }
    if (!ok) {
      throw Error(ErrorCode::kBadColumn,
                  fmt::format("storage type of '{}' does not match its role", spec.name));
    }
    const std::size_t len = ColumnLength(columns_[i]);
    if (i == 0) {
      n_rows_ = len;
    } else if (len != n_rows_) {
      throw Error(ErrorCode::kLengthMismatch,
                  fmt::format("column '{}' has {} rows, expected {}", spec.name, len, n_rows_));
    }
  }
}

std::span<const double> Dataset::numeric(std::size_t column) const {
  const auto* v = std::get_if<std::vector<double>>(&columns_.at(column));
  if (!v) throw Error(ErrorCode::kBadColumn, schema_.column(column).name + " is not numeric");
  return *v;
}

std::span<const std::int32_t> Dataset::codes(std::size_t column) const {
  const auto* v = std::get_if<std::vector<std::int32_t>>(&columns_.at(column));
  if (!v) {
    throw Error(ErrorCode::kBadColumn, schema_.column(column).name + " is not categorical");
  }
  return *v;
}

std::span<const std::int64_t> Dataset::periods(std::size_t column) const {
  const auto* v = std::get_if<std::vector<std::int64_t>>(&columns_.at(column));
  if (!v) throw Error(ErrorCode::kBadColumn, schema_.column(column).name + " is not a time column");
  return *v;
}

std::span<const std::string> Dataset::ids(std::size_t column) const {
  const auto* v = std::get_if<std::vector<std::string>>(&columns_.at(column));
  if (!v) throw Error(ErrorCode::kBadColumn, schema_.column(column).name + " is not an id column");
  return *v;
}

std::vector<std::uint8_t> Dataset::Labels() const {
  const auto label = codes(schema_.label_index());
  return {label.begin(), label.end()};
}

std::vector<std::uint8_t> Dataset::Labels(std::span<const std::size_t> rows) const {
  const auto label = codes(schema_.label_index());
  std::vector<std::uint8_t> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(static_cast<std::uint8_t>(label[r]));
  return out;
}

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  std::vector<ColumnData> cols;
  cols.reserve(columns_.size());
  for (const auto& col : columns_) {
    cols.push_back(std::visit(
        [&](const auto& v) -> ColumnData {
          std::remove_cvref_t<decltype(v)> out;
          out.reserve(rows.size());
          for (std::size_t r : rows) out.push_back(v.at(r));
          return out;
        },
        col));
  }
  return Dataset(schema_, std::move(cols));
}

Dataset ReadCsv(std::istream& in, const Schema& schema) {
  std::vector<std::string> header;
  if (!ReadRecord(in, header)) throw Error(ErrorCode::kBadCell, "CSV has no header row");
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

  std::vector<std::size_t> source(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    auto it = std::find(header.begin(), header.end(), schema.column(i).name);
    if (it == header.end()) {
      throw Error(ErrorCode::kUnknownColumn,
                  fmt::format("manifest column '{}' is absent from the CSV header",
                              schema.column(i).name));
    }
    source[i] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<ColumnData> columns;
  for (const ColumnSpec& spec : schema.columns()) {
    switch (spec.role) {
      case Role::kNumericFeature: columns.emplace_back(std::vector<double>{}); break;
      case Role::kTime: columns.emplace_back(std::vector<std::int64_t>{}); break;
      case Role::kId: columns.emplace_back(std::vector<std::string>{}); break;
      default: columns.emplace_back(std::vector<std::int32_t>{}); break;
    }
  }
  std::vector<std::map<std::string, std::int32_t, std::less<>>> lookup(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& cats = schema.column(i).categories;
    for (std::size_t c = 0; c < cats.size(); ++c) {
      lookup[i].emplace(cats[c], static_cast<std::int32_t>(c));
    }
  }

  std::vector<std::string> record;
  std::size_t row = 0;
  while (ReadRecord(in, record)) {
    if (record.size() == 1 && record[0].empty()) continue;  // blank line
    if (record.size() != header.size()) {
      throw Error(ErrorCode::kBadCell, fmt::format("row {} has {} fields, header has {}", row,
                                                   record.size(), header.size()));
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const ColumnSpec& spec = schema.column(i);
      const std::string& cell = record[source[i]];
      auto bad = [&](std::string_view why) {
        return Error(ErrorCode::kBadCell,
                     fmt::format("row {}, column '{}': {} ('{}')", row, spec.name, why, cell));
      };
      if (cell.empty()) throw bad("missing value");
      switch (spec.role) {
        case Role::kNumericFeature: {
          double v = 0.0;
          if (!ParseNumber(cell, v) || !std::isfinite(v)) throw bad("not a finite number");
          std::get<std::vector<double>>(columns[i]).push_back(v);
          break;
        }
        case Role::kTime: {
          std::int64_t v = 0;
          if (!ParseNumber(cell, v)) throw bad("time must be an integer");
          std::get<std::vector<std::int64_t>>(columns[i]).push_back(v);
          break;
        }
        case Role::kId:
          std::get<std::vector<std::string>>(columns[i]).push_back(cell);
          break;
        default: {
          auto it = lookup[i].find(cell);
          if (it == lookup[i].end()) throw bad("category not declared in manifest");
          std::get<std::vector<std::int32_t>>(columns[i]).push_back(it->second);
          break;
        }
      }
    }
    ++row;
  }
  return Dataset(schema, std::move(columns));
}

Dataset LoadCsv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
  return ReadCsv(in, schema);
}

void WriteCsv(const Dataset& ds, std::ostream& out) {
  const Schema& schema = ds.schema();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    out << (i ? "," : "") << QuoteCsv(schema.column(i).name);
  }
  out << '\n';
  std::string line;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    line.clear();
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (i) line.push_back(',');
      const ColumnSpec& spec = schema.column(i);
      switch (spec.role) {
        case Role::kNumericFeature: line += fmt::format("{}", ds.numeric(i)[r]); break;
        case Role::kTime: line += fmt::format("{}", ds.periods(i)[r]); break;
        case Role::kId: line += QuoteCsv(ds.ids(i)[r]); break;
        default: line += QuoteCsv(spec.categories.at(ds.codes(i)[r])); break;
      }
    }
    line.push_back('\n');
    out << line;
  }
}

void SaveCsv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
  WriteCsv(ds, out);
}

std::vector<Issue> Validate(const Dataset& ds) {
  std::vector<Issue> issues;
  const Schema& schema = ds.schema();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const ColumnSpec& spec = schema.column(i);
    if (spec.IsCategorical()) {
      const auto codes = ds.codes(i);
      const auto limit = static_cast<std::int32_t>(spec.categories.size());
      for (std::size_t r = 0; r < codes.size(); ++r) {
        if (codes[r] < 0 || codes[r] >= limit) {
          issues.push_back({"category_out_of_range", spec.name, r});
        }
      }
    } else if (spec.role == Role::kNumericFeature) {
      const auto values = ds.numeric(i);
      for (std::size_t r = 0; r < values.size(); ++r) {
        if (!std::isfinite(values[r])) issues.push_back({"non_finite", spec.name, r});
      }
    }
  }
  return issues;
}

namespace {

void Shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.Below(i)]);
  }
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> SplitIndices(
    std::span<const std::size_t> rows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kDegenerateSplit, "train fraction must be in (0, 1)");
  }
  const auto k = static_cast<std::size_t>(std::llround(train_fraction * rows.size()));
  if (k == 0 || k == rows.size()) {
    throw Error(ErrorCode::kDegenerateSplit,
                fmt::format("fraction {} of {} rows leaves one side empty", train_fraction,
                            rows.size()));
  }
  std::vector<std::size_t> perm(rows.begin(), rows.end());
  Rng rng(seed);
  Shuffle(perm, rng);
  std::vector<std::size_t> train(perm.begin(), perm.begin() + k);
  std::vector<std::size_t> eval(perm.begin() + k, perm.end());
  std::sort(train.begin(), train.end());
  std::sort(eval.begin(), eval.end());
  return {std::move(train), std::move(eval)};
}

SplitPlan SplitRandom(const Dataset& ds, double train_fraction, std::uint64_t seed,
                      const std::optional<std::string>& stratify_by) {
  const std::size_t n = ds.n_rows();
  if (n < 2) throw Error(ErrorCode::kDegenerateSplit, "need at least 2 rows");
  SplitPlan plan;
  plan.seed = seed;
  if (!stratify_by) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    auto [train, eval] = SplitIndices(all, train_fraction, seed);
    plan.train = std::move(train);
    plan.eval = std::move(eval);
    plan.strategy = SplitStrategy::kRandom;
    return plan;
  }

  const auto column = ds.schema().Find(*stratify_by);
  if (!column || !ds.schema().column(*column).IsCategorical()) {
    throw Error(ErrorCode::kBadColumn,
                fmt::format("cannot stratify by '{}': not a categorical column", *stratify_by));
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kDegenerateSplit, "train fraction must be in (0, 1)");
  }
  const auto codes = ds.codes(*column);
  const std::size_t n_strata = ds.schema().column(*column).categories.size();
  std::vector<std::vector<std::size_t>> strata(n_strata);
  for (std::size_t r = 0; r < n; ++r) strata.at(static_cast<std::size_t>(codes[r])).push_back(r);

  // Largest remainder: floor quotas, then hand out the remaining seats by
  // descending fractional part (lower stratum code wins ties).
  const auto total = static_cast<std::size_t>(std::llround(train_fraction * n));
  std::vector<std::size_t> quota(n_strata);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < n_strata; ++s) {
    const double exact = train_fraction * static_cast<double>(strata[s].size());
    quota[s] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[s];
    remainders.emplace_back(exact - std::floor(exact), s);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i) {
    const std::size_t s = remainders[i].second;
    if (quota[s] < strata[s].size()) {
      ++quota[s];
      ++assigned;
    }
  }
  if (total == 0 || total == n) {
    throw Error(ErrorCode::kDegenerateSplit, "split would leave one side empty");
  }

  for (std::size_t s = 0; s < n_strata; ++s) {
    Rng rng(DeriveSeed(seed, s));
    std::vector<std::size_t>& rows = strata[s];
    Shuffle(rows, rng);
    plan.train.insert(plan.train.end(), rows.begin(), rows.begin() + quota[s]);
    plan.eval.insert(plan.eval.end(), rows.begin() + quota[s], rows.end());
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.eval.begin(), plan.eval.end());
  plan.strategy = SplitStrategy::kStratified;
  plan.stratify_by = *stratify_by;
  return plan;
}

std::vector<TimeSlice> SliceByTime(const Dataset& ds) {
  const auto time = ds.schema().time_index();
  if (!time) throw Error(ErrorCode::kNoTimeColumn, "schema has no time column");
  const auto periods = ds.periods(*time);
  std::map<std::int64_t, std::vector<std::size_t>> by_period;
  for (std::size_t r = 0; r < periods.size(); ++r) by_period[periods[r]].push_back(r);
  std::vector<TimeSlice> slices;
  for (auto& [period, rows] : by_period) slices.push_back({period, std::move(rows)});
  return slices;
}

SplitPlan SplitTemporal(const Dataset& ds, std::span<const std::int64_t> train_periods,
                        std::span<const std::int64_t> eval_periods) {
  const auto time = ds.schema().time_index();
  if (!time) throw Error(ErrorCode::kNoTimeColumn, "schema has no time column");
  const std::set<std::int64_t> train_set(train_periods.begin(), train_periods.end());
  const std::set<std::int64_t> eval_set(eval_periods.begin(), eval_periods.end());
  for (std::int64_t p : train_set) {
    if (eval_set.count(p)) {
      throw Error(ErrorCode::kDegenerateSplit,
                  fmt::format("period {} is both a train and an eval period", p));
    }
  }
  SplitPlan plan;
  plan.strategy = SplitStrategy::kTemporal;
  plan.train_periods.assign(train_set.begin(), train_set.end());
  plan.eval_periods.assign(eval_set.begin(), eval_set.end());
  const auto periods = ds.periods(*time);
  for (std::size_t r = 0; r < periods.size(); ++r) {
    if (train_set.count(periods[r])) plan.train.push_back(r);
    if (eval_set.count(periods[r])) plan.eval.push_back(r);
  }
  return plan;
}

FeatureMatrix::FeatureMatrix(std::vector<FeatureInfo> features, std::size_t n_rows)
    : features_(std::move(features)), n_rows_(n_rows), values_(features_.size() * n_rows, 0.0) {}

FeatureMatrix FeatureMatrix::FromDataset(const Dataset& ds) {
  const auto columns = ds.schema().FeatureIndices();
  return FromDataset(ds, columns);
}

FeatureMatrix FeatureMatrix::FromDataset(const Dataset& ds, std::span<const std::size_t> columns) {
  std::vector<FeatureInfo> info;
  for (std::size_t c : columns) {
    const ColumnSpec& spec = ds.schema().column(c);
    if (spec.role == Role::kId) {
      throw Error(ErrorCode::kBadColumn, fmt::format("id column '{}' is not a feature", spec.name));
    }
    FeatureInfo f;
    f.name = spec.name;
    if (spec.IsCategorical()) {
      f.kind = FeatureKind::kCategorical;
      f.categories = spec.categories;
    }
    info.push_back(std::move(f));
  }
  FeatureMatrix m(std::move(info), ds.n_rows());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const std::size_t c = columns[j];
    double* out = m.values_.data() + j * m.n_rows_;
    std::visit(
        [&](const auto& v) {
          using T = typename std::remove_cvref_t<decltype(v)>::value_type;
          if constexpr (!std::is_same_v<T, std::string>) {
            for (std::size_t r = 0; r < v.size(); ++r) out[r] = static_cast<double>(v[r]);
          }
        },
        ds.data(c));
  }
  return m;
}

FeatureMatrix FeatureMatrix::FromDataset(const Dataset& ds, std::span<const FeatureInfo> features) {
  std::vector<std::size_t> columns;
  for (const FeatureInfo& f : features) {
    const std::size_t c = ds.schema().IndexOf(f.name);
    const ColumnSpec& spec = ds.schema().column(c);
    const bool categorical = f.kind == FeatureKind::kCategorical;
    if (categorical != spec.IsCategorical() || (categorical && spec.categories != f.categories)) {
      throw Error(ErrorCode::kArityMismatch,
                  fmt::format("column '{}' does not match the model's feature definition", f.name));
    }
    columns.push_back(c);
  }
  return FromDataset(ds, columns);
}

std::vector<double> FeatureMatrix::Row(std::size_t row) const {
  std::vector<double> out(features_.size());
  for (std::size_t f = 0; f < features_.size(); ++f) out[f] = at(row, f);
  return out;
}

}  // namespace fairaudit::tabular
