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

#include "jbf/reference.hpp"

#include "kernel_common.hpp"

namespace jbf::reference {

namespace {

template <typename Fn>
void for_each_neighbour(const Dims& d, const Window& win, std::int64_t kx, std::int64_t ky, std::int64_t kz, Fn&& fn) {
    const auto sx = detail::clip(kx, win.radii[0], d.nx);
    const auto sy = detail::clip(ky, win.radii[1], d.ny);
    const auto sz = detail::clip(kz, win.radii[2], d.nz);
    for (std::int64_t z = sz.lo; z <= sz.hi; ++z) {
        for (std::int64_t y = sy.lo; y <= sy.hi; ++y) {
            for (std::int64_t x = sx.lo; x <= sx.hi; ++x) {
                fn(x, y, z);
            }
        }
    }
}

}  // namespace

ForwardCache jbf_forward(const Volume& x, const Volume& z, const FilterParams& params, const Window& window) {
    detail::require_same_dims(x, z, "reference::jbf_forward");
    params.validate();
    window.validate();
    const Dims d = x.dims();
    Volume w(d), alpha(d), y_hat(d);
    for (std::int64_t kz = 0; kz < d.nz; ++kz) {
        for (std::int64_t ky = 0; ky < d.ny; ++ky) {
            for (std::int64_t kx = 0; kx < d.nx; ++kx) {
                const std::int64_t k = x.index(kx, ky, kz);
                double wk = 0.0;
                double ak = 0.0;
                for_each_neighbour(d, window, kx, ky, kz, [&](std::int64_t nx, std::int64_t ny, std::int64_t nz) {
                    const std::int64_t n = x.index(nx, ny, nz);
                    const std::array<double, 3> off{static_cast<double>(kx - nx), static_cast<double>(ky - ny),
                                                    static_cast<double>(kz - nz)};
                    const double g = gauss_spatial(off, params) * gauss_range(z[k] - z[n], params.sigma_r);
                    wk += g;
                    ak += g * x[n];
                });
                w[k] = wk;
                alpha[k] = ak;
                y_hat[k] = ak / wk;
            }
        }
    }
    return {std::move(w), std::move(alpha), std::move(y_hat)};
}

GradientBundle backward(const Volume& x, const Volume& z, const FilterParams& params, const Window& window,
                        const ForwardCache& cache, const Volume& dL_dy) {
    detail::require_same_dims(x, z, "reference::backward");
    detail::require_same_dims(x, cache.w, "reference::backward");
    detail::require_same_dims(x, dL_dy, "reference::backward");
    params.validate();
    window.validate();

    const Dims d = x.dims();
    const auto sig = params.as_array();
    const double sr2 = params.sigma_r * params.sigma_r;

    GradientBundle out;
    out.d_input = Volume(d);
    out.d_guide = Volume(d);

    for (std::int64_t kz = 0; kz < d.nz; ++kz) {
        for (std::int64_t ky = 0; ky < d.ny; ++ky) {
            for (std::int64_t kx = 0; kx < d.nx; ++kx) {
                const std::int64_t k = x.index(kx, ky, kz);
                const double gk = dL_dy[k];
                const double wk = cache.w[k];
                const double ak = cache.alpha[k];
                std::array<double, 4> dw_dsigma{0.0, 0.0, 0.0, 0.0};
                std::array<double, 4> da_dsigma{0.0, 0.0, 0.0, 0.0};
                double dw_dzk = 0.0;  // centre case, k == i
                double da_dzk = 0.0;

                for_each_neighbour(d, window, kx, ky, kz, [&](std::int64_t nx, std::int64_t ny, std::int64_t nz) {
                    const std::int64_t n = x.index(nx, ny, nz);
                    const std::array<double, 3> off{static_cast<double>(kx - nx), static_cast<double>(ky - ny),
                                                    static_cast<double>(kz - nz)};
                    const double range_diff = z[k] - z[n];
                    const double g = gauss_spatial(off, params) * gauss_range(range_diff, params.sigma_r);

                    out.d_input[n] += gk / wk * g;

                    const std::array<double, 4> c{off[0], off[1], off[2], range_diff};
                    for (int s = 0; s < 4; ++s) {
                        const double dg = g * c[s] * c[s] / (sig[s] * sig[s] * sig[s]);
                        dw_dsigma[s] += dg;
                        da_dsigma[s] += dg * x[n];
                    }

                    if (n != k) {
                        // neighbour case, k != i with i = n
                        const double dw = g * (z[k] - z[n]) / sr2;
                        const double da = dw * x[n];
                        out.d_guide[n] += gk * (-ak / (wk * wk) * dw + da / wk);
                    }
                    const double dwc = g * (z[n] - z[k]) / sr2;
                    dw_dzk += dwc;
                    da_dzk += dwc * x[n];
                });

                out.d_guide[k] += gk * (-ak / (wk * wk) * dw_dzk + da_dzk / wk);
                for (int s = 0; s < 4; ++s) {
                    out.d_sigma[s] += gk * (-ak / (wk * wk) * dw_dsigma[s] + da_dsigma[s] / wk);
                }
            }
        }
    }
    return out;
}

}  // namespace jbf::reference
