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

#include <span>

namespace jbf {

struct WilcoxonResult {
    double statistic = 0.0;  ///< min(W+, W-)
    double p_value = 1.0;    ///< two-sided
    int n = 0;               ///< nonzero differences used
    bool exact = false;
};

/// Largest n for which the null distribution is enumerated exactly.
inline constexpr int kWilcoxonExactMax = 20;

/// Paired Wilcoxon signed-rank test on differences. Zeros are dropped, tied
/// |d| get their average rank. The two-sided p is P(min(W+, W-) <= W) under
/// random signs, exact up to kWilcoxonExactMax nonzero differences and a
/// continuity-corrected normal approximation (with tie correction) above.
/// Throws std::invalid_argument with fewer than 5 nonzero differences.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs);

}  // namespace jbf
