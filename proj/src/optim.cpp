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

#include "jbf/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace jbf {

AdamUpdate adam_step(double param, double grad, const AdamState& state, double lr) {
    if (!std::isfinite(grad)) throw std::domain_error("adam_step: non-finite gradient");
    AdamState s = state;
    s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
    s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad * grad;
    s.t += 1;
    const double m_hat = s.m / (1.0 - std::pow(s.beta1, static_cast<double>(s.t)));
    const double v_hat = s.v / (1.0 - std::pow(s.beta2, static_cast<double>(s.t)));
    return {param - lr * m_hat / (std::sqrt(v_hat) + s.eps), s};
}

FilterParams project_sigmas(const FilterParams& params, double sigma_min) {
    if (!(sigma_min > 0.0)) throw std::invalid_argument("sigma_min must be > 0");
    auto a = params.as_array();
    for (double& s : a) s = std::max(s, sigma_min);
    return FilterParams::from_array(a);
}

void TrainConfig::validate() const {
    if (!(lr_range > 0.0) || !(lr_spatial > 0.0)) throw std::invalid_argument("learning rates must be > 0");
    if (!(sigma_min > 0.0)) throw std::invalid_argument("sigma_min must be > 0");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
}

namespace {

// One Adam instance over a group of scalars sharing a learning rate.
class AdamGroup {
  public:
    AdamGroup(double lr, std::size_t n) : lr_(lr), states_(n) {}

    double step(std::size_t slot, double param, double grad) {
        const AdamUpdate u = adam_step(param, grad, states_[slot], lr_);
        states_[slot] = u.state;
        return u.param;
    }

  private:
    double lr_;
    std::vector<AdamState> states_;
};

}  // namespace

TrainResult train(std::span<const TrainingPair> pairs, PipelineState state, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    state.validate();
    if (pairs.empty()) throw std::invalid_argument("train: need at least one training pair");
    for (const auto& p : pairs) {
        if (!(p.noisy.dims() == p.target.dims())) throw std::invalid_argument("train: noisy/target dims mismatch");
    }

    const std::size_t layers = state.layers.size();
    AdamGroup range_opt(cfg.lr_range, layers);
    AdamGroup spatial_opt(cfg.lr_spatial, 3 * layers);

    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);

    TrainResult result;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const TrainingPair& pair = pairs[idx];
            const Volume guide = resolve_guide(pair.noisy, state, pair.guide);
            const PipelineTape tape = pipeline_forward(pair.noisy, guide, state);
            const LossAndGrad lg = mse_loss(tape.prediction(), pair.target);
            if (!std::isfinite(lg.loss)) {
                std::ostringstream os;
                os << "training diverged: non-finite loss in epoch " << epoch;
                throw std::runtime_error(os.str());
            }
            loss_sum += lg.loss;
            // Guide is treated as detached: d_guide is not folded into any update.
            const PipelineGradients grads = pipeline_backward(tape, guide, state, lg.grad);

            for (std::size_t v = 0; v < layers; ++v) {
                auto sig = state.layers[v].as_array();
                for (int a = 0; a < 3; ++a) {
                    sig[a] = spatial_opt.step(3 * v + static_cast<std::size_t>(a), sig[a], grads.d_sigma[v][a]);
                }
                sig[kSigmaR] = range_opt.step(v, sig[kSigmaR], grads.d_sigma[v][kSigmaR]);
                state.layers[v] = project_sigmas(FilterParams::from_array(sig), cfg.sigma_min);
            }
        }
        const double mean = loss_sum / static_cast<double>(pairs.size());
        result.loss_history.push_back(mean);
        if (on_epoch) on_epoch(epoch, mean, state);
    }
    result.state = std::move(state);
    return result;
}

double default_sigma_r(std::span<const TrainingPair> pairs) {
    if (pairs.empty()) throw std::invalid_argument("default_sigma_r: no pairs");
    double lo = pairs.front().target.min();
    double hi = pairs.front().target.max();
    for (const auto& p : pairs) {
        lo = std::min(lo, p.target.min());
        hi = std::max(hi, p.target.max());
    }
    const double range = hi - lo;
    return range > 0.0 ? 0.1 * range : 1.0;
}

void save_loss_csv(std::span<const double> history, const std::filesystem::path& path) {
    std::ostringstream os;
    os.precision(17);
    os << "epoch,mean_train_mse\n";
    for (std::size_t e = 0; e < history.size(); ++e) os << (e + 1) << "," << history[e] << "\n";
    const std::string text = os.str();
    write_file_atomic(path, std::span<const char>(text.data(), text.size()));
}

}  // namespace jbf
