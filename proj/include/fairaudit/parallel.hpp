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

namespace fairaudit {

// Caps the OpenMP worker count. Results never depend on it.
void SetThreadCount(std::size_t threads);
std::size_t ThreadCount();

// Applies QF4SA_AUDIT_THREADS when set to a positive integer.
void ApplyThreadEnv();

}  // namespace fairaudit
