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

#include <array>
#include <cmath>

#include "jbf/volume.hpp"

namespace jbf {

/// Trainable kernel widths of one joint bilateral filter layer. Spatial
/// widths are in voxels, the range width in intensity units.
struct FilterParams {
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    double sigma_z = 1.0;
    double sigma_r = 1.0;

    /// Throws std::invalid_argument unless all four are finite and > 0.
    void validate() const;

    /// Order: x, y, z, r. Matches SigmaGrad.
    std::array<double, 4> as_array() const { return {sigma_x, sigma_y, sigma_z, sigma_r}; }
    static FilterParams from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

    bool operator==(const FilterParams&) const = default;
};

/// Index into FilterParams::as_array() / SigmaGrad.
enum SigmaIndex : int { kSigmaX = 0, kSigmaY = 1, kSigmaZ = 2, kSigmaR = 3 };

/// Half-widths of the box neighbourhood. Neighbours outside the volume are
/// dropped, the centre is always part of it.
struct Window {
    std::array<int, 3> radii{0, 0, 0};

    void validate() const;
    /// ceil(2 * sigma) per axis, capped.
    static Window from_sigmas(const FilterParams& p, int cap = 7);

    bool operator==(const Window&) const = default;
};

/// Per-voxel intermediates of a forward pass, reused by the backward pass.
struct ForwardCache {
    Volume w;      ///< normalizer, sum of combined weights
    Volume alpha;  ///< unnormalized weighted sum of inputs
    Volume y_hat;  ///< filtered output, alpha / w
};

inline double gauss_range(double c, double sigma_r) { return std::exp(-(c * c) / (2.0 * sigma_r * sigma_r)); }

inline double gauss_spatial(const std::array<double, 3>& d, const FilterParams& p) {
    return std::exp(-(d[0] * d[0]) / (2.0 * p.sigma_x * p.sigma_x)) *
           std::exp(-(d[1] * d[1]) / (2.0 * p.sigma_y * p.sigma_y)) *
           std::exp(-(d[2] * d[2]) / (2.0 * p.sigma_z * p.sigma_z));
}

/// Joint bilateral filter of `x` steered by guide `z`. Parallel over output
/// voxels; results do not depend on the thread count.
ForwardCache jbf_forward(const Volume& x, const Volume& z, const FilterParams& params, const Window& window);

/// Normalized truncated Gaussian smoothing, isotropic `sigma`, boundary
/// neighbours excluded. A non-positive sigma or zero radii return `x`.
Volume gaussian_smooth(const Volume& x, double sigma, const std::array<int, 3>& radii);

/// Radius ceil(2 * sigma) on every axis.
Volume gaussian_smooth(const Volume& x, double sigma);

}  // namespace jbf
