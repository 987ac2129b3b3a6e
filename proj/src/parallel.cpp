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

#include "fairaudit/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace fairaudit {

void SetThreadCount(std::size_t threads) {
  omp_set_num_threads(static_cast<int>(threads == 0 ? 1 : threads));
}

std::size_t ThreadCount() { return static_cast<std::size_t>(omp_get_max_threads()); }

void ApplyThreadEnv() {
  const char* env = std::getenv("QF4SA_AUDIT_THREADS");
  if (!env) return;
  try {
    const long n = std::stol(env);
    if (n > 0) SetThreadCount(static_cast<std::size_t>(n));
  } catch (const std::exception&) {
    // Ignore malformed values; the default thread count applies.
  }
}

}  // namespace fairaudit
