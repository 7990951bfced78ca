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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jbf/pipeline.hpp"

namespace jbf {

/// Analytical gradient route under test. Defaults to pipeline_backward.
using AnalyticalGradFn =
    std::function<PipelineGradients(const PipelineTape&, const Volume&, const PipelineState&, const Volume&)>;

struct GradCheckConfig {
    Dims dims{5, 5, 3};
    Window window{{2, 2, 1}};
    FilterParams params{1.2, 0.8, 1.0, 30.0};
    int layers = 3;
    std::uint64_t seed = 0;
    double tolerance = 1e-5;
    double step_scale = 1e-4;  ///< h = step_scale * sigma, or * intensity std for voxels
};

struct QuantityError {
    std::string name;  ///< "layer1.sigma_x", ..., "d_input", "d_guide"
    double max_rel = 0.0;
    double max_abs = 0.0;
    double step = 0.0;
    std::int64_t components = 0;
};

struct GradCheckReport {
    std::vector<QuantityError> quantities;
    double max_rel = 0.0;
    double max_abs = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    const QuantityError& get(const std::string& name) const;
};

/// Seeded instance used by gradcheck(): blocky piecewise-constant target,
/// input = target + N(0, 20^2), guide = target + N(0, 5^2).
struct GradCheckInstance {
    Volume x;
    Volume guide;
    Volume target;
};

GradCheckInstance make_gradcheck_instance(const Dims& dims, std::uint64_t seed);

/// Compares every sigma gradient of every layer plus dL/dX and dL/dZ against
/// central differences of the end-to-end MSE loss. The guide is treated as
/// an independent input. Relative error uses |fd| + 1e-12 as denominator.
GradCheckReport gradcheck(const GradCheckInstance& inst, const PipelineState& state, double tolerance,
                          double step_scale = 1e-4, const AnalyticalGradFn& analytical = pipeline_backward);

GradCheckReport gradcheck(const GradCheckConfig& cfg, const AnalyticalGradFn& analytical = pipeline_backward);

nlohmann::json to_json(const GradCheckReport& r);

}  // namespace jbf
