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

#include "jbf/pipeline.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kernel_common.hpp"

namespace jbf {

std::string to_string(GuideMode m) {
    switch (m) {
        case GuideMode::self: return "self";
        case GuideMode::file: return "file";
        case GuideMode::gauss: return "gauss";
    }
    return "self";
}

GuideMode parse_guide_mode(const std::string& s) {
    if (s == "self") return GuideMode::self;
    if (s == "file") return GuideMode::file;
    if (s == "gauss") return GuideMode::gauss;
    throw std::invalid_argument("unknown guide mode '" + s + "' (expected self|file|gauss)");
}

void PipelineState::validate() const {
    if (layers.empty()) throw std::invalid_argument("pipeline needs at least one layer");
    for (const auto& p : layers) p.validate();
    window.validate();
    if (guide_mode == GuideMode::gauss && (!std::isfinite(gauss_sigma) || gauss_sigma < 0.0)) {
        throw std::invalid_argument("gauss guide mode needs a finite gauss_sigma >= 0");
    }
}

PipelineState make_pipeline(int num_layers, double sigma_s, double sigma_r, const Window& window, GuideMode mode,
                            double gauss_sigma) {
    PipelineState s;
    s.layers.assign(static_cast<std::size_t>(std::max(num_layers, 0)), FilterParams{sigma_s, sigma_s, sigma_s, sigma_r});
    s.window = window;
    s.guide_mode = mode;
    s.gauss_sigma = gauss_sigma;
    s.validate();
    return s;
}

nlohmann::json to_json(const PipelineState& s) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& p : s.layers) {
        layers.push_back({{"sigma_x", p.sigma_x}, {"sigma_y", p.sigma_y}, {"sigma_z", p.sigma_z}, {"sigma_r", p.sigma_r}});
    }
    nlohmann::json j = {
        {"window", {{"radii", {s.window.radii[0], s.window.radii[1], s.window.radii[2]}}}},
        {"guide_mode", to_string(s.guide_mode)},
        {"layers", layers},
    };
    if (s.guide_mode == GuideMode::gauss) j["gauss_sigma"] = s.gauss_sigma;
    return j;
}

PipelineState pipeline_from_json(const nlohmann::json& j) {
    PipelineState s;
    try {
        const auto& radii = j.at("window").at("radii");
        if (!radii.is_array() || radii.size() != 3) throw std::invalid_argument("window.radii must have 3 entries");
        s.window.radii = {radii[0].get<int>(), radii[1].get<int>(), radii[2].get<int>()};
        s.guide_mode = parse_guide_mode(j.at("guide_mode").get<std::string>());
        if (s.guide_mode == GuideMode::gauss) s.gauss_sigma = j.at("gauss_sigma").get<double>();
        for (const auto& l : j.at("layers")) {
            s.layers.push_back({l.at("sigma_x").get<double>(), l.at("sigma_y").get<double>(),
                                l.at("sigma_z").get<double>(), l.at("sigma_r").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("invalid pipeline parameters: ") + e.what());
    }
    s.validate();
    return s;
}

PipelineState load_pipeline(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parameter file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("corrupt parameter file " + path.string() + ": " + e.what());
    }
    return pipeline_from_json(j);
}

void save_pipeline(const PipelineState& s, const std::filesystem::path& path) {
    const std::string text = to_json(s).dump(2) + "\n";
    write_file_atomic(path, std::span<const char>(text.data(), text.size()));
}

Volume resolve_guide(const Volume& x, const PipelineState& state, const std::optional<Volume>& guide_file) {
    if (guide_file.has_value() != (state.guide_mode == GuideMode::file)) {
        throw std::invalid_argument(state.guide_mode == GuideMode::file
                                        ? "guide mode 'file' requires a guide volume"
                                        : "a guide volume was supplied but guide mode is '" +
                                              to_string(state.guide_mode) + "'");
    }
    switch (state.guide_mode) {
        case GuideMode::self: return x;
        case GuideMode::file:
            detail::require_same_dims(x, *guide_file, "resolve_guide");
            return *guide_file;
        case GuideMode::gauss: return gaussian_smooth(x, state.gauss_sigma);
    }
    return x;
}

PipelineTape pipeline_forward(const Volume& x, const Volume& guide, const PipelineState& state) {
    state.validate();
    detail::require_same_dims(x, guide, "pipeline_forward");
    PipelineTape tape;
    tape.inputs.reserve(state.layers.size());
    tape.caches.reserve(state.layers.size());
    const Volume* current = &x;
    for (const auto& params : state.layers) {
        tape.inputs.push_back(*current);
        tape.caches.push_back(jbf_forward(tape.inputs.back(), guide, params, state.window));
        current = &tape.caches.back().y_hat;
    }
    return tape;
}

LossAndGrad mse_loss(const Volume& pred, const Volume& target) {
    detail::require_same_dims(pred, target, "mse_loss");
    const auto n = static_cast<double>(pred.size());
    Volume grad(pred.dims());
    double sum = 0.0;
    for (std::int64_t i = 0; i < pred.size(); ++i) {
        const double diff = pred[i] - target[i];
        sum += diff * diff;
        grad[i] = 2.0 / n * diff;
    }
    return {sum / n, std::move(grad)};
}

PipelineGradients pipeline_backward(const PipelineTape& tape, const Volume& guide, const PipelineState& state,
                                    const Volume& dL_dpred) {
    if (tape.caches.size() != state.layers.size() || tape.inputs.size() != state.layers.size()) {
        throw std::invalid_argument("pipeline tape does not match the layer count");
    }
    detail::require_same_dims(tape.prediction(), dL_dpred, "pipeline_backward");

    PipelineGradients out;
    out.d_sigma.resize(state.layers.size());
    out.d_guide = Volume(guide.dims());
    Volume running = dL_dpred;
    for (std::size_t v = state.layers.size(); v-- > 0;) {
        GradientBundle b = backward(tape.inputs[v], guide, state.layers[v], state.window, tape.caches[v], running);
        out.d_sigma[v] = b.d_sigma;
        for (std::int64_t i = 0; i < out.d_guide.size(); ++i) out.d_guide[i] += b.d_guide[i];
        running = std::move(b.d_input);
    }
    out.d_input = std::move(running);
    return out;
}

}  // namespace jbf
