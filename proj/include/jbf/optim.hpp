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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "jbf/pipeline.hpp"

namespace jbf {

/// Per-parameter Adam moments plus the hyperparameters that drive them.
struct AdamState {
    double m = 0.0;
    double v = 0.0;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamUpdate {
    double param;
    AdamState state;
};

/// Bias-corrected Adam. Throws std::domain_error on a non-finite gradient.
AdamUpdate adam_step(double param, double grad, const AdamState& state, double lr);

/// Clamps every sigma from below.
FilterParams project_sigmas(const FilterParams& params, double sigma_min);

struct TrainConfig {
    double lr_range = 1e-2;    ///< all sigma_r
    double lr_spatial = 5e-4;  ///< all sigma_x, sigma_y, sigma_z
    int epochs = 200;
    std::uint64_t seed = 0;    ///< sample order shuffling
    double sigma_min = 1e-3;

    void validate() const;
};

struct TrainingPair {
    Volume noisy;
    Volume target;
    std::optional<Volume> guide;  ///< required iff guide mode is file
};

struct TrainResult {
    PipelineState state;
    std::vector<double> loss_history;  ///< mean training MSE per epoch
};

/// Called after every epoch with (epoch index from 1, mean loss, params).
using EpochCallback = std::function<void(int, double, const PipelineState&)>;

/// Sample-wise training of every sigma in the stack. Range and spatial
/// sigmas are driven by two separate Adam optimizers with their own rates.
/// Throws std::runtime_error if the loss turns non-finite.
TrainResult train(std::span<const TrainingPair> pairs, PipelineState state, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// sigma_r initialization: 0.1 x (max - min) over all targets.
double default_sigma_r(std::span<const TrainingPair> pairs);

/// "epoch,mean_train_mse" CSV.
void save_loss_csv(std::span<const double> history, const std::filesystem::path& path);

}  // namespace jbf
