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

#include "jbf/filter.hpp"

namespace jbf {

/// dL/dsigma in FilterParams::as_array() order.
using SigmaGrad = std::array<double, 4>;

struct GradientBundle {
    SigmaGrad d_sigma{0.0, 0.0, 0.0, 0.0};
    Volume d_input;
    Volume d_guide;
};

// All of these take the cache produced by jbf_forward(x, z, params, window)
// and an upstream gradient dL/dY with the layer's dims. The loops gather
// around each output voxel, so there is no write contention, and the sigma
// reduction runs over fixed row blocks in a fixed order.

SigmaGrad grad_sigma(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                     const ForwardCache& cache, const Volume& dL_dy);

/// Independent of the input values; only the guide enters the weights.
Volume grad_input(const Volume& z, const FilterParams& params, const Window& window, const ForwardCache& cache,
                  const Volume& dL_dy);

Volume grad_guide(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                  const ForwardCache& cache, const Volume& dL_dy);

/// All three gradients in a single pass.
GradientBundle backward(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                        const ForwardCache& cache, const Volume& dL_dy);

}  // namespace jbf
