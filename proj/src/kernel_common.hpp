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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jbf/filter.hpp"

namespace jbf::detail {

/// exp(-d^2 / (2 sigma^2)) for d in [-r, r], stored at d + r.
inline std::vector<double> axis_table(double sigma, int r) {
    std::vector<double> t(static_cast<std::size_t>(2 * r + 1));
    for (int d = -r; d <= r; ++d) {
        const double dd = static_cast<double>(d);
        t[static_cast<std::size_t>(d + r)] = std::exp(-(dd * dd) / (2.0 * sigma * sigma));
    }
    return t;
}

/// Inclusive neighbour bounds of centre `c` clipped to [0, n).
struct Span1 {
    std::int64_t lo;
    std::int64_t hi;
};

inline Span1 clip(std::int64_t c, int r, std::int64_t n) {
    return {std::max<std::int64_t>(0, c - r), std::min<std::int64_t>(n - 1, c + r)};
}

inline void require_same_dims(const Volume& a, const Volume& b, const char* what) {
    if (!(a.dims() == b.dims())) {
        throw std::invalid_argument(std::string(what) + ": dims mismatch " + to_string(a.dims()) + " vs " +
                                    to_string(b.dims()));
    }
}

}  // namespace jbf::detail
