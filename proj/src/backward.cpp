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

#include "jbf/backward.hpp"

#include <span>

#include "kernel_common.hpp"

namespace jbf {

namespace {

struct Outputs {
    bool sigma = false;
    bool input = false;
    bool guide = false;
};

void check_inputs(const Volume& x, const Volume& z, const ForwardCache& cache, const Volume& dL_dy) {
    detail::require_same_dims(x, z, "backward (input/guide)");
    detail::require_same_dims(x, cache.w, "backward (cache)");
    detail::require_same_dims(x, cache.y_hat, "backward (cache)");
    detail::require_same_dims(x, dL_dy, "backward (upstream gradient)");
}

// Pairwise sum of per-row partials; the tree shape depends only on the row
// count, never on the thread count.
SigmaGrad tree_sum(std::span<const SigmaGrad> parts) {
    if (parts.empty()) return {0.0, 0.0, 0.0, 0.0};
    if (parts.size() == 1) return parts[0];
    const std::size_t half = parts.size() / 2;
    const SigmaGrad a = tree_sum(parts.first(half));
    const SigmaGrad b = tree_sum(parts.subspan(half));
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

// Gather form. For output voxel i and every neighbour n of i:
//   dL/dX_i += c_n W_in                      with c = dL/dY / w
//   dL/dZ_i += c_n W_in (Z_n - Z_i)/s_r^2 (X_i - Y_n)   (k = n != i term)
//            + c_i W_in (Z_n - Z_i)/s_r^2 (X_n - Y_i)   (k = i term)
//   dL/ds_g += c_i W_in (X_n - Y_i) d_g^2 / s_g^3
// W is symmetric in (i, n) and so is the clipped neighbourhood relation.
GradientBundle gather(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                      const ForwardCache& cache, const Volume& dL_dy, Outputs want) {
    check_inputs(x, z, cache, dL_dy);
    params.validate();
    window.validate();

    const Dims d = x.dims();
    const auto [rx, ry, rz] = window.radii;
    const auto tx = detail::axis_table(params.sigma_x, rx);
    const auto ty = detail::axis_table(params.sigma_y, ry);
    const auto tz = detail::axis_table(params.sigma_z, rz);
    const double range_coeff = -1.0 / (2.0 * params.sigma_r * params.sigma_r);
    const double inv_sr2 = 1.0 / (params.sigma_r * params.sigma_r);

    const auto xs = x.values();
    const auto zs = z.values();
    const auto ys = cache.y_hat.values();
    const auto ws = cache.w.values();
    const auto gs = dL_dy.values();

    std::vector<double> c(xs.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = gs[i] / ws[i];

    std::vector<double> d_input(want.input ? xs.size() : 0);
    std::vector<double> d_guide(want.guide ? xs.size() : 0);
    const std::int64_t rows = d.ny * d.nz;
    std::vector<SigmaGrad> row_sigma(want.sigma ? static_cast<std::size_t>(rows) : 0);

#pragma omp parallel for schedule(static)
    for (std::int64_t row = 0; row < rows; ++row) {
        const std::int64_t cy = row % d.ny;
        const std::int64_t cz = row / d.ny;
        const auto sy = detail::clip(cy, ry, d.ny);
        const auto sz = detail::clip(cz, rz, d.nz);
        SigmaGrad row_acc{0.0, 0.0, 0.0, 0.0};
        for (std::int64_t cx = 0; cx < d.nx; ++cx) {
            const std::int64_t i = x.index(cx, cy, cz);
            const auto sx = detail::clip(cx, rx, d.nx);
            const double xi = xs[i];
            const double zi = zs[i];
            const double yi = ys[i];
            const double ci = c[i];
            double acc_input = 0.0;
            double acc_guide = 0.0;
            double acc_sx = 0.0, acc_sy = 0.0, acc_sz = 0.0, acc_sr = 0.0;
            for (std::int64_t nz = sz.lo; nz <= sz.hi; ++nz) {
                const double oz = static_cast<double>(nz - cz);
                const double gz = tz[nz - cz + rz];
                for (std::int64_t ny = sy.lo; ny <= sy.hi; ++ny) {
                    const double oy = static_cast<double>(ny - cy);
                    const double gzy = gz * ty[ny - cy + ry];
                    const std::int64_t base = x.index(0, ny, nz);
                    for (std::int64_t nx = sx.lo; nx <= sx.hi; ++nx) {
                        const std::int64_t n = base + nx;
                        const double ox = static_cast<double>(nx - cx);
                        const double dzv = zs[n] - zi;
                        const double weight = gzy * tx[nx - cx + rx] * std::exp(dzv * dzv * range_coeff);
                        if (want.input) acc_input += c[n] * weight;
                        if (want.guide) acc_guide += weight * dzv * (c[n] * (xi - ys[n]) + ci * (xs[n] - yi));
                        if (want.sigma) {
                            const double t = weight * (xs[n] - yi);
                            acc_sx += t * ox * ox;
                            acc_sy += t * oy * oy;
                            acc_sz += t * oz * oz;
                            acc_sr += t * dzv * dzv;
                        }
                    }
                }
            }
            if (want.input) d_input[i] = acc_input;
            if (want.guide) d_guide[i] = acc_guide * inv_sr2;
            if (want.sigma) {
                row_acc[kSigmaX] += ci * acc_sx;
                row_acc[kSigmaY] += ci * acc_sy;
                row_acc[kSigmaZ] += ci * acc_sz;
                row_acc[kSigmaR] += ci * acc_sr;
            }
        }
        if (want.sigma) row_sigma[row] = row_acc;
    }

    GradientBundle out;
    if (want.sigma) {
        const SigmaGrad raw = tree_sum(row_sigma);
        const auto s = params.as_array();
        for (int g = 0; g < 4; ++g) out.d_sigma[g] = raw[g] / (s[g] * s[g] * s[g]);
    }
    if (want.input) out.d_input = Volume(d, std::move(d_input));
    if (want.guide) out.d_guide = Volume(d, std::move(d_guide));
    return out;
}

}  // namespace

SigmaGrad grad_sigma(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                     const ForwardCache& cache, const Volume& dL_dy) {
    return gather(x, z, params, window, cache, dL_dy, {.sigma = true}).d_sigma;
}

Volume grad_input(const Volume& z, const FilterParams& params, const Window& window, const ForwardCache& cache,
                  const Volume& dL_dy) {
    // X values never enter the input gradient; y_hat stands in for the dims check.
    return gather(cache.y_hat, z, params, window, cache, dL_dy, {.input = true}).d_input;
}

Volume grad_guide(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                  const ForwardCache& cache, const Volume& dL_dy) {
    return gather(x, z, params, window, cache, dL_dy, {.guide = true}).d_guide;
}

GradientBundle backward(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                        const ForwardCache& cache, const Volume& dL_dy) {
    return gather(x, z, params, window, cache, dL_dy, {.sigma = true, .input = true, .guide = true});
}

}  // namespace jbf
