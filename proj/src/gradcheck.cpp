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

#include "jbf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jbf {

namespace {

constexpr double kRelFloor = 1e-12;
constexpr const char* kSigmaNames[4] = {"sigma_x", "sigma_y", "sigma_z", "sigma_r"};

double stddev(const Volume& v) {
    double mean = 0.0;
    for (double x : v.values()) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v.values()) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

Volume predict(const Volume& x, const Volume& guide, const PipelineState& state) {
    return pipeline_forward(x, guide, state).prediction();
}

// MSE(a) - MSE(b) summed voxel by voxel as (a - b)(a + b - 2t) / N. Same
// value as subtracting the two losses, without the cancellation between two
// large totals that otherwise sets the noise floor of the quotient.
double loss_difference(const Volume& a, const Volume& b, const Volume& target) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] + b[i] - 2.0 * target[i]);
    return acc / static_cast<double>(a.size());
}

void set_sigma(PipelineState& state, std::size_t layer, int which, double value) {
    auto a = state.layers[layer].as_array();
    a[static_cast<std::size_t>(which)] = value;
    state.layers[layer] = FilterParams::from_array(a);
}

// Seven-point central difference at h, 2h, 3h, exact up to O(h^6). The
// plain quotient's h^2 term is large for narrow range kernels at the fixed
// step; the wider stencil removes it without shrinking the step, which would
// raise the rounding noise instead. `predict_at(delta)` returns the pipeline
// output with the probed quantity shifted by delta.
template <typename PredictAt>
double central_difference(PredictAt&& predict_at, const Volume& target, double h) {
    auto delta = [&](double step) { return loss_difference(predict_at(step), predict_at(-step), target); };
    return (45.0 * delta(h) - 9.0 * delta(2.0 * h) + delta(3.0 * h)) / (60.0 * h);
}

void record(QuantityError& q, double analytical, double numerical) {
    const double abs_err = std::abs(analytical - numerical);
    q.max_abs = std::max(q.max_abs, abs_err);
    q.max_rel = std::max(q.max_rel, abs_err / (std::abs(numerical) + kRelFloor));
    ++q.components;
}

// Central differences over every voxel of the input (or the guide).
QuantityError check_field(const std::string& name, const Volume& analytical, const GradCheckInstance& inst,
                          const PipelineState& state, double step_scale, bool perturb_guide) {
    QuantityError q{name};
    const Volume& field = perturb_guide ? inst.guide : inst.x;
    const double scale = stddev(field);
    q.step = step_scale * (scale > 0.0 ? scale : 1.0);
    Volume probe = field;
    for (std::int64_t i = 0; i < field.size(); ++i) {
        const double orig = probe[i];
        auto predict_at = [&](double delta) {
            probe[i] = orig + delta;
            Volume y = perturb_guide ? predict(inst.x, probe, state) : predict(probe, inst.guide, state);
            probe[i] = orig;
            return y;
        };
        record(q, analytical[i], central_difference(predict_at, inst.target, q.step));
    }
    return q;
}

}  // namespace

const QuantityError& GradCheckReport::get(const std::string& name) const {
    for (const auto& q : quantities) {
        if (q.name == name) return q;
    }
    throw std::out_of_range("no gradcheck quantity named " + name);
}

GradCheckInstance make_gradcheck_instance(const Dims& dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);

    // Cut long axes into runs of 3-5 voxels, so along any axis a voxel has
    // two block mates. Pairs isolated by a 1-D window leave dL/dZ components
    // that nearly cancel, so axes shorter than 6 stay whole unless every axis
    // is short. Then runs of 2-3 are allowed: one flat block makes the guide
    // std (and so h) tiny and the differences noise.
    const bool all_short = std::max({dims.nx, dims.ny, dims.nz}) < 6;
    auto cut = [&rng, all_short](std::int64_t n) {
        const std::int64_t lo = n >= 6 ? 3 : (all_short ? 2 : n);
        std::uniform_int_distribution<std::int64_t> width(lo, lo + 2);
        std::vector<std::int64_t> label(static_cast<std::size_t>(n));
        std::int64_t start = 0, block = 0;
        while (start < n) {
            const std::int64_t rest = n - start;
            const std::int64_t len = rest < 2 * lo ? rest : std::min(width(rng), rest - lo);
            for (std::int64_t i = start; i < start + len; ++i) label[static_cast<std::size_t>(i)] = block;
            start += len;
            ++block;
        }
        return std::pair{label, block};
    };
    const auto [bx, nbx] = cut(dims.nx);
    const auto [by, nby] = cut(dims.ny);
    const auto [bz, nbz] = cut(dims.nz);

    // Piecewise-constant levels on the phantom grid -150, -100, ..., 500,
    // redrawn until each block differs from its lower neighbours.
    std::uniform_int_distribution<int> step(0, 13);
    std::vector<double> level(static_cast<std::size_t>(nbx * nby * nbz));
    for (std::int64_t c = 0; c < nbz; ++c) {
        for (std::int64_t b = 0; b < nby; ++b) {
            for (std::int64_t a = 0; a < nbx; ++a) {
                const auto at = [&](std::int64_t i, std::int64_t j, std::int64_t k) -> double& {
                    return level[static_cast<std::size_t>(i + nbx * (j + nby * k))];
                };
                double& l = at(a, b, c);
                do {
                    l = -150.0 + 50.0 * step(rng);
                } while ((a > 0 && l == at(a - 1, b, c)) || (b > 0 && l == at(a, b - 1, c)) ||
                         (c > 0 && l == at(a, b, c - 1)));
            }
        }
    }

    // Guide noise matches the smallest range sigma of interest (5), so
    // each guide voxel has neighbours inside the range kernel. With wide
    // guide noise and narrow sigma_r some dL/dZ components shrink to ~1e-10,
    // below what a 64-bit difference quotient can resolve.
    std::normal_distribution<double> noise(0.0, 1.0);
    Volume target(dims), x(dims), guide(dims);
    for (std::int64_t z = 0; z < dims.nz; ++z) {
        for (std::int64_t y = 0; y < dims.ny; ++y) {
            for (std::int64_t xx = 0; xx < dims.nx; ++xx) {
                const auto b = bx[static_cast<std::size_t>(xx)] +
                               nbx * (by[static_cast<std::size_t>(y)] + nby * bz[static_cast<std::size_t>(z)]);
                const double clean = level[static_cast<std::size_t>(b)];
                target.at(xx, y, z) = clean;
                x.at(xx, y, z) = clean + 20.0 * noise(rng);
                guide.at(xx, y, z) = clean + 5.0 * noise(rng);
            }
        }
    }
    return {std::move(x), std::move(guide), std::move(target)};
}

GradCheckReport gradcheck(const GradCheckInstance& inst, const PipelineState& state, double tolerance,
                          double step_scale, const AnalyticalGradFn& analytical) {
    state.validate();
    if (!(step_scale > 0.0)) throw std::invalid_argument("gradcheck: step scale must be > 0");

    const PipelineTape tape = pipeline_forward(inst.x, inst.guide, state);
    const LossAndGrad lg = mse_loss(tape.prediction(), inst.target);
    const PipelineGradients grads = analytical(tape, inst.guide, state, lg.grad);

    GradCheckReport report;
    report.tolerance = tolerance;
    for (std::size_t v = 0; v < state.layers.size(); ++v) {
        for (int s = 0; s < 4; ++s) {
            QuantityError q{"layer" + std::to_string(v + 1) + "." + kSigmaNames[s]};
            const double sigma = state.layers[v].as_array()[s];
            q.step = step_scale * sigma;
            PipelineState probe = state;
            auto predict_at = [&](double delta) {
                set_sigma(probe, v, s, sigma + delta);
                return predict(inst.x, inst.guide, probe);
            };
            record(q, grads.d_sigma[v][s], central_difference(predict_at, inst.target, q.step));
            report.quantities.push_back(q);
        }
    }
    report.quantities.push_back(check_field("d_input", grads.d_input, inst, state, step_scale, false));
    report.quantities.push_back(check_field("d_guide", grads.d_guide, inst, state, step_scale, true));

    for (const auto& q : report.quantities) {
        report.max_rel = std::max(report.max_rel, q.max_rel);
        report.max_abs = std::max(report.max_abs, q.max_abs);
    }
    report.pass = report.max_rel < tolerance;
    return report;
}

GradCheckReport gradcheck(const GradCheckConfig& cfg, const AnalyticalGradFn& analytical) {
    if (cfg.layers < 1) throw std::invalid_argument("gradcheck: layers must be >= 1");
    if (cfg.dims.count() > 8 * 8 * 4) {
        throw std::invalid_argument("gradcheck: dims " + to_string(cfg.dims) + " exceed desk scale (8x8x4 voxels)");
    }
    PipelineState state;
    state.layers.assign(static_cast<std::size_t>(cfg.layers), cfg.params);
    state.window = cfg.window;
    state.guide_mode = GuideMode::file;
    return gradcheck(make_gradcheck_instance(cfg.dims, cfg.seed), state, cfg.tolerance, cfg.step_scale, analytical);
}

nlohmann::json to_json(const GradCheckReport& r) {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& e : r.quantities) {
        q.push_back({{"name", e.name},
                     {"max_rel_error", e.max_rel},
                     {"max_abs_error", e.max_abs},
                     {"step", e.step},
                     {"components", e.components}});
    }
    return {{"pass", r.pass},
            {"tolerance", r.tolerance},
            {"max_rel_error", r.max_rel},
            {"max_abs_error", r.max_abs},
            {"quantities", q}};
}

}  // namespace jbf
