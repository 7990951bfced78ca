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
#include <optional>
#include <string>

#include <json.hpp>

#include "jbf/volume.hpp"

namespace jbf {

double rmse(const Volume& a, const Volume& b);

/// 20 log10(data_range / rmse). +infinity when the volumes are identical.
double psnr(const Volume& a, const Volume& b, double data_range);

/// Gaussian-window width used by ssim().
inline constexpr double kSsimWindowSigma = 1.5;
inline constexpr int kSsimDefaultRadius = 5;

/// Mean structural similarity, evaluated slice by slice in 2-D with a
/// Gaussian window (sigma 1.5) of the given radius. Only centres whose
/// window lies inside the slice contribute; all slices are weighted equally.
double ssim(const Volume& a, const Volume& b, double data_range, int window_radius = kSsimDefaultRadius);

struct MetricsReport {
    double rmse = 0.0;
    double psnr = 0.0;  ///< +inf when rmse == 0
    double ssim = 0.0;
    std::int64_t n_voxels = 0;
};

/// `b` is the reference. data_range defaults to max(b) - min(b).
MetricsReport evaluate(const Volume& a, const Volume& b, std::optional<double> data_range = std::nullopt,
                       int ssim_radius = kSsimDefaultRadius);

/// psnr is written as the string "inf" when infinite.
nlohmann::json to_json(const MetricsReport& r);
std::string csv_header();
std::string csv_row(const std::string& label, const MetricsReport& r);

}  // namespace jbf
