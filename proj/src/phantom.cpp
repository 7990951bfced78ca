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

#include <cmath>
#include <random>
#include <stdexcept>

#include "jbf/volume.hpp"

namespace jbf {

namespace {

struct Ellipsoid {
    double cx, cy, cz;
    double ax, ay, az;
    double value;

    bool contains(double x, double y, double z) const {
        const double u = (x - cx) / ax;
        const double v = (y - cy) / ay;
        const double w = (z - cz) / az;
        return u * u + v * v + w * w <= 1.0;
    }
};

// Display window the intensities are drawn from.
constexpr double kLevelLo = -150.0;
constexpr double kLevelHi = 500.0;

}  // namespace

PhantomPair make_phantom(Dims dims, std::uint64_t seed, double noise_sigma) {
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw std::invalid_argument("noise_sigma must be finite and >= 0");
    }
    Volume clean(dims, kLevelLo);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double nx = static_cast<double>(dims.nx);
    const double ny = static_cast<double>(dims.ny);
    const double nz = static_cast<double>(dims.nz);

    // Body outline, then a handful of inserts painted on top in order.
    std::vector<Ellipsoid> shapes;
    shapes.push_back({(nx - 1) / 2, (ny - 1) / 2, (nz - 1) / 2, 0.45 * nx, 0.4 * ny, 0.6 * nz + 0.5, 40.0});
    const int inserts = 5 + static_cast<int>(unit(rng) * 4.0);
    for (int i = 0; i < inserts; ++i) {
        Ellipsoid e{};
        e.cx = (0.25 + 0.5 * unit(rng)) * (nx - 1);
        e.cy = (0.25 + 0.5 * unit(rng)) * (ny - 1);
        e.cz = (0.2 + 0.6 * unit(rng)) * (nz - 1);
        e.ax = (0.05 + 0.12 * unit(rng)) * nx + 0.5;
        e.ay = (0.05 + 0.12 * unit(rng)) * ny + 0.5;
        e.az = (0.2 + 0.4 * unit(rng)) * nz + 0.5;
        // Quantized levels keep inserts distinct from each other and the body.
        const int level = static_cast<int>(unit(rng) * 13.0);
        e.value = kLevelLo + 50.0 * (level + 1);
        shapes.push_back(e);
    }

    for (std::int64_t z = 0; z < dims.nz; ++z) {
        for (std::int64_t y = 0; y < dims.ny; ++y) {
            for (std::int64_t x = 0; x < dims.nx; ++x) {
                double v = kLevelLo;
                for (const auto& s : shapes) {
                    if (s.contains(static_cast<double>(x), static_cast<double>(y), static_cast<double>(z))) {
                        v = s.value;
                    }
                }
                clean.at(x, y, z) = v;
            }
        }
    }

    Volume noisy = clean;
    if (noise_sigma > 0.0) {
        std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (double& v : noisy.values()) v += noise(noise_rng);
    }
    return {std::move(clean), std::move(noisy)};
}

}  // namespace jbf
