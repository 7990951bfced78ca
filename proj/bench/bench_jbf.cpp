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

// Serial reference kernels against the OpenMP ones.
// Args: edge length n of an n x n x 8 volume, thread count (parallel only).

#include <random>

#include <benchmark/benchmark.h>

#include "jbf/backward.hpp"
#include "jbf/filter.hpp"
#include "jbf/parallel.hpp"
#include "jbf/reference.hpp"

namespace {

using namespace jbf;

const FilterParams kParams{1.0, 1.0, 0.8, 50.0};
const Window kWindow{{2, 2, 1}};

struct Inputs {
    Volume x, z, up;
};

Inputs make_inputs(std::int64_t n) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-150.0, 500.0);
    const Dims d{n, n, 8};
    Inputs in{Volume(d), Volume(d), Volume(d)};
    for (double& v : in.x.values()) v = u(rng);
    for (double& v : in.z.values()) v = u(rng);
    for (double& v : in.up.values()) v = u(rng) / 500.0;
    return in;
}

void voxels(benchmark::State& state, std::int64_t n) {
    state.SetItemsProcessed(state.iterations() * n * n * 8);
}

void BM_ForwardReference(benchmark::State& state) {
    const auto in = make_inputs(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(reference::jbf_forward(in.x, in.z, kParams, kWindow));
    voxels(state, state.range(0));
}

void BM_ForwardParallel(benchmark::State& state) {
    const auto in = make_inputs(state.range(0));
    set_num_threads(static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(jbf_forward(in.x, in.z, kParams, kWindow));
    voxels(state, state.range(0));
}

void BM_BackwardReference(benchmark::State& state) {
    const auto in = make_inputs(state.range(0));
    const auto cache = jbf_forward(in.x, in.z, kParams, kWindow);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::backward(in.x, in.z, kParams, kWindow, cache, in.up));
    }
    voxels(state, state.range(0));
}

void BM_BackwardParallel(benchmark::State& state) {
    const auto in = make_inputs(state.range(0));
    set_num_threads(static_cast<int>(state.range(1)));
    const auto cache = jbf_forward(in.x, in.z, kParams, kWindow);
    for (auto _ : state) benchmark::DoNotOptimize(backward(in.x, in.z, kParams, kWindow, cache, in.up));
    voxels(state, state.range(0));
}

void thread_args(benchmark::internal::Benchmark* b) {
    for (std::int64_t n : {64, 128}) {
        for (int t = 1; t <= hardware_threads(); t *= 2) b->Args({n, t});
        if ((hardware_threads() & (hardware_threads() - 1)) != 0) b->Args({n, hardware_threads()});
    }
}

BENCHMARK(BM_ForwardReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BackwardReference)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackwardParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
