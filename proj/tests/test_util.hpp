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

// Fixtures shared by the unit suites.

#pragma once

#include <gtest/gtest.h>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/common.hpp"
#include "fairaudit/tabular.hpp"

namespace fairaudit::testing {

// Runs `fn` and checks that it throws fairaudit::Error with `code`.
inline void ExpectError(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << ErrorCodeName(code) << ", nothing thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

inline tabular::ColumnSpec Numeric(std::string name) {
  return {std::move(name), tabular::Role::kNumericFeature, {}};
}
inline tabular::ColumnSpec Categorical(std::string name, std::vector<std::string> cats) {
  return {std::move(name), tabular::Role::kCategoricalFeature, std::move(cats)};
}
inline tabular::ColumnSpec Protected(std::string name, std::vector<std::string> cats) {
  return {std::move(name), tabular::Role::kProtected, std::move(cats)};
}
inline tabular::ColumnSpec Label(std::string name = "y") {
  return {std::move(name), tabular::Role::kLabel, {"0", "1"}};
}

// Builds a dataset from (spec, data) pairs.
inline tabular::Dataset MakeDataset(
    std::vector<std::pair<tabular::ColumnSpec, tabular::ColumnData>> columns) {
  std::vector<tabular::ColumnSpec> specs;
  std::vector<tabular::ColumnData> data;
  for (auto& [spec, col] : columns) {
    specs.push_back(std::move(spec));
    data.push_back(std::move(col));
  }
  return tabular::Dataset(tabular::Schema(std::move(specs)), std::move(data));
}

inline std::vector<std::int32_t> ToCodes(const std::vector<std::uint8_t>& v) {
  return {v.begin(), v.end()};
}

}  // namespace fairaudit::testing
