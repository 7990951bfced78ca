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

// Single-threaded kernels kept as a baseline for the tests and the benchmark.
// They evaluate the kernel functions directly per neighbour pair (no lookup
// tables) and the backward pass is written in scatter form, looping over
// output voxels k and pushing into every neighbour, which is the transpose of
// the gather used by the parallel kernels.

#include "jbf/backward.hpp"
#include "jbf/filter.hpp"

namespace jbf::reference {

ForwardCache jbf_forward(const Volume& x, const Volume& z, const FilterParams& params, const Window& window);

GradientBundle backward(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                        const ForwardCache& cache, const Volume& dL_dy);

}  // namespace jbf::reference
