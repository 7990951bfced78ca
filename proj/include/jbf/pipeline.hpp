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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jbf/backward.hpp"
#include "jbf/filter.hpp"

namespace jbf {

enum class GuideMode { self, file, gauss };

std::string to_string(GuideMode m);
GuideMode parse_guide_mode(const std::string& s);

/// Stack of filter layers that all read the same guide image.
struct PipelineState {
    std::vector<FilterParams> layers;
    Window window;
    GuideMode guide_mode = GuideMode::self;
    double gauss_sigma = 0.0;  ///< only meaningful for GuideMode::gauss

    void validate() const;
    bool operator==(const PipelineState&) const = default;
};

/// `num_layers` copies of spatial sigma `sigma_s` and range sigma `sigma_r`.
PipelineState make_pipeline(int num_layers, double sigma_s, double sigma_r, const Window& window,
                            GuideMode mode = GuideMode::self, double gauss_sigma = 0.0);

nlohmann::json to_json(const PipelineState& s);
PipelineState pipeline_from_json(const nlohmann::json& j);
PipelineState load_pipeline(const std::filesystem::path& path);
void save_pipeline(const PipelineState& s, const std::filesystem::path& path);

/// Picks the guide image: x itself, the supplied file, or a Gaussian-smoothed x.
Volume resolve_guide(const Volume& x, const PipelineState& state, const std::optional<Volume>& guide_file);

/// Reverse-mode record: inputs[v] fed layer v, caches[v] is its forward cache.
struct PipelineTape {
    std::vector<Volume> inputs;
    std::vector<ForwardCache> caches;

    const Volume& prediction() const { return caches.back().y_hat; }
};

PipelineTape pipeline_forward(const Volume& x, const Volume& guide, const PipelineState& state);

struct LossAndGrad {
    double loss = 0.0;
    Volume grad;
};

/// Mean squared error and its gradient with respect to `pred`.
LossAndGrad mse_loss(const Volume& pred, const Volume& target);

struct PipelineGradients {
    std::vector<SigmaGrad> d_sigma;  ///< one entry per layer
    Volume d_guide;                  ///< summed over all layers
    Volume d_input;
};

PipelineGradients pipeline_backward(const PipelineTape& tape, const Volume& guide, const PipelineState& state,
                                    const Volume& dL_dpred);

}  // namespace jbf
