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

#include "jbf/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace jbf {

int hardware_threads() { return omp_get_num_procs(); }

std::optional<int> threads_from_env() {
    const char* raw = std::getenv(kThreadsEnv);
    if (raw == nullptr) return std::nullopt;
    try {
        std::size_t used = 0;
        const int n = std::stoi(raw, &used);
        if (used == std::string(raw).size() && n > 0) return n;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

void set_num_threads(int n) {
    if (n <= 0) n = threads_from_env().value_or(hardware_threads());
    omp_set_num_threads(n);
}

int num_threads() { return omp_get_max_threads(); }

}  // namespace jbf
