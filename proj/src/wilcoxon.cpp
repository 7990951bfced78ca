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

#include "jbf/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace jbf {

WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs) {
    std::vector<double> d;
    for (double v : diffs) {
        if (!std::isfinite(v)) throw std::invalid_argument("wilcoxon: non-finite difference");
        if (v != 0.0) d.push_back(v);
    }
    const int n = static_cast<int>(d.size());
    if (n < 5) throw std::invalid_argument("wilcoxon: need at least 5 nonzero differences, got " + std::to_string(n));

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(d[a]) < std::abs(d[b]); });

    // Ranks are kept doubled so that tie averages stay integral.
    std::vector<int> rank2(static_cast<std::size_t>(n));
    double tie_term = 0.0;
    for (int i = 0; i < n;) {
        int j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        const int avg2 = (i + 1) + (j + 1);  // 2 * mean of ranks i+1 .. j+1
        for (int t = i; t <= j; ++t) rank2[order[t]] = avg2;
        const double t_len = j - i + 1;
        tie_term += t_len * t_len * t_len - t_len;
        i = j + 1;
    }

    int plus2 = 0;
    int total2 = 0;
    for (int i = 0; i < n; ++i) {
        total2 += rank2[i];
        if (d[i] > 0.0) plus2 += rank2[i];
    }
    const int w2 = std::min(plus2, total2 - plus2);

    WilcoxonResult res;
    res.n = n;
    res.statistic = w2 / 2.0;

    if (n <= kWilcoxonExactMax) {
        // counts[s] = number of sign assignments with doubled W+ == s.
        std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
        counts[0] = 1.0;
        int reach = 0;
        for (int r : rank2) {
            for (int s = reach; s >= 0; --s) {
                if (counts[s] != 0.0) counts[s + r] += counts[s];
            }
            reach += r;
        }
        double hits = 0.0;
        for (int s = 0; s <= total2; ++s) {
            if (std::min(s, total2 - s) <= w2) hits += counts[s];
        }
        res.p_value = std::min(1.0, hits / std::ldexp(1.0, n));
        res.exact = true;
        return res;
    }

    const double nn = n;
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    if (!(var > 0.0)) {
        res.p_value = 1.0;
        return res;
    }
    const double zscore = std::min(0.0, res.statistic - mean + 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(-zscore / std::sqrt(2.0)));
    return res;
}

}  // namespace jbf
