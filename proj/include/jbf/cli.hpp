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

// Subcommand bodies behind tools/jbf. Each returns a process exit code and
// writes its report to `out`, diagnostics to `err`.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "jbf/filter.hpp"

namespace jbf::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

/// Invalid combination of flags or inputs; maps to kUsage.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// "a,b,c" -> three integers.
std::array<std::int64_t, 3> parse_triple(const std::string& text);

using Path = std::filesystem::path;

struct DenoiseOptions {
    Path input;
    Path params;
    std::optional<Path> guide;
    Path output;
    std::optional<Path> target;
    std::optional<double> data_range;
    int ssim_radius = 5;
};

struct TrainOptions {
    Path noisy_dir;
    Path target_dir;
    std::optional<Path> guide_dir;
    Path out_params;
    Path loss_csv;
    std::optional<Path> init_params;  ///< overrides the layer/sigma/window flags
    int layers = 3;
    std::optional<std::string> radii;  ///< default ceil(2 sigma_s) per axis, capped at 7
    std::string guide_mode = "self";
    double gauss_sigma = 1.0;
    double sigma_s_init = 1.0;
    std::optional<double> sigma_r_init;  ///< default 0.1 x target intensity range
    double lr_range = 1e-2;
    double lr_spatial = 5e-4;
    int epochs = 200;
    std::uint64_t seed = 0;
    double sigma_min = 1e-3;
    std::optional<Path> val_noisy_dir;
    std::optional<Path> val_target_dir;
    bool quiet = false;
};

struct GradcheckOptions {
    std::string dims = "5,5,3";
    std::string radii = "2,2,1";
    FilterParams params{1.2, 0.8, 1.0, 30.0};
    int layers = 3;
    std::uint64_t seed = 0;
    double tolerance = 1e-5;
    bool json = false;
};

struct MetricsOptions {
    Path a;
    Path b;  ///< reference
    std::optional<std::string> roi;
    std::optional<double> data_range;
    int ssim_radius = 5;
    bool csv = false;
    std::string label = "metrics";
};

struct PhantomOptions {
    std::string dims = "64,64,8";
    std::uint64_t seed = 0;
    double noise = 20.0;
    Path out_prefix;
};

struct SliceOptions {
    Path input;
    std::int64_t slice = 0;
    double window_lo = -150.0;
    double window_hi = 500.0;
    Path output;
};

int cmd_denoise(const DenoiseOptions& o, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out, std::ostream& err);
int cmd_metrics(const MetricsOptions& o, std::ostream& out, std::ostream& err);
int cmd_phantom(const PhantomOptions& o, std::ostream& out, std::ostream& err);
int cmd_export_slice(const SliceOptions& o, std::ostream& out, std::ostream& err);

/// Stems written by cmd_phantom.
Path phantom_clean_path(const Path& prefix);
Path phantom_noisy_path(const Path& prefix);

}  // namespace jbf::cli
