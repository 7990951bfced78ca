/*
 * Copyright 2026 The jbf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>

namespace jbf {

/// Environment variable consulted for the default worker cap.
inline constexpr const char* kThreadsEnv = "JBF_NUM_THREADS";

/// Number of hardware threads the OpenMP runtime reports.
int hardware_threads();

/// Caps the worker count used by every parallel kernel. n <= 0 restores the
/// default (env var if set, otherwise all cores).
void set_num_threads(int n);

int num_threads();

/// Parsed value of JBF_NUM_THREADS, if set to a positive integer.
std::optional<int> threads_from_env();

}  // namespace jbf
