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

#include "jbf/filter.hpp"

#include <limits>

#include "kernel_common.hpp"

namespace jbf {

void FilterParams::validate() const {
    for (double s : as_array()) {
        if (!std::isfinite(s) || !(s > 0.0)) {
            throw std::invalid_argument("filter sigmas must be finite and > 0");
        }
    }
}

void Window::validate() const {
    for (int r : radii) {
        if (r < 0) throw std::invalid_argument("window radii must be >= 0");
    }
}

Window Window::from_sigmas(const FilterParams& p, int cap) {
    auto radius = [cap](double s) { return std::min(cap, static_cast<int>(std::ceil(2.0 * s))); };
    return Window{{radius(p.sigma_x), radius(p.sigma_y), radius(p.sigma_z)}};
}

ForwardCache jbf_forward(const Volume& x, const Volume& z, const FilterParams& params, const Window& window) {
    detail::require_same_dims(x, z, "jbf_forward");
    params.validate();
    window.validate();

    const Dims d = x.dims();
    const auto [rx, ry, rz] = window.radii;
    const auto tx = detail::axis_table(params.sigma_x, rx);
    const auto ty = detail::axis_table(params.sigma_y, ry);
    const auto tz = detail::axis_table(params.sigma_z, rz);
    const double range_coeff = -1.0 / (2.0 * params.sigma_r * params.sigma_r);

    const auto xs = x.values();
    const auto zs = z.values();
    std::vector<double> w(xs.size()), alpha(xs.size()), y_hat(xs.size());

    const std::int64_t rows = d.ny * d.nz;
#pragma omp parallel for schedule(static)
    for (std::int64_t row = 0; row < rows; ++row) {
        const std::int64_t cy = row % d.ny;
        const std::int64_t cz = row / d.ny;
        const auto sy = detail::clip(cy, ry, d.ny);
        const auto sz = detail::clip(cz, rz, d.nz);
        for (std::int64_t cx = 0; cx < d.nx; ++cx) {
            const std::int64_t k = x.index(cx, cy, cz);
            const auto sx = detail::clip(cx, rx, d.nx);
            const double xk = xs[k];
            const double zk = zs[k];
            double wk = 0.0;
            double ak = 0.0;
            double centered = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::int64_t nz = sz.lo; nz <= sz.hi; ++nz) {
                const double gz = tz[nz - cz + rz];
                for (std::int64_t ny = sy.lo; ny <= sy.hi; ++ny) {
                    const double gzy = gz * ty[ny - cy + ry];
                    const std::int64_t base = x.index(0, ny, nz);
                    for (std::int64_t nx = sx.lo; nx <= sx.hi; ++nx) {
                        const std::int64_t n = base + nx;
                        const double dz = zk - zs[n];
                        const double weight = gzy * tx[nx - cx + rx] * std::exp(dz * dz * range_coeff);
                        const double xn = xs[n];
                        wk += weight;
                        ak += weight * xn;
                        centered += weight * (xn - xk);
                        lo = std::min(lo, xn);
                        hi = std::max(hi, xn);
                    }
                }
            }
            w[k] = wk;
            alpha[k] = ak;
            // Centred form keeps constants and singleton windows exact; the
            // clamp removes rounding excursions past the neighbourhood range.
            y_hat[k] = std::clamp(xk + centered / wk, lo, hi);
        }
    }
    return ForwardCache{Volume(d, std::move(w)), Volume(d, std::move(alpha)), Volume(d, std::move(y_hat))};
}

namespace {

// One normalized 1-D pass along `axis` (0 = x, 1 = y, 2 = z).
Volume smooth_axis(const Volume& in, const std::vector<double>& table, int r, int axis) {
    const Dims d = in.dims();
    const std::int64_t n_axis = axis == 0 ? d.nx : axis == 1 ? d.ny : d.nz;
    const std::int64_t stride = axis == 0 ? 1 : axis == 1 ? d.nx : d.nx * d.ny;
    const auto src = in.values();
    std::vector<double> out(src.size());
    const std::int64_t total = in.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
        const std::int64_t c = (i / stride) % n_axis;
        const auto s = detail::clip(c, r, n_axis);
        double acc = 0.0;
        double norm = 0.0;
        for (std::int64_t p = s.lo; p <= s.hi; ++p) {
            const double g = table[static_cast<std::size_t>(p - c + r)];
            acc += g * src[i + (p - c) * stride];
            norm += g;
        }
        out[i] = acc / norm;
    }
    return Volume(d, std::move(out));
}

}  // namespace

Volume gaussian_smooth(const Volume& x, double sigma, const std::array<int, 3>& radii) {
    if (!(sigma > 0.0)) return x;
    Volume out = x;
    for (int axis = 0; axis < 3; ++axis) {
        const int r = radii[axis];
        if (r < 0) throw std::invalid_argument("smoothing radius must be >= 0");
        if (r == 0) continue;
        out = smooth_axis(out, detail::axis_table(sigma, r), r, axis);
    }
    return out;
}

Volume gaussian_smooth(const Volume& x, double sigma) {
    if (!(sigma > 0.0)) return x;
    const int r = static_cast<int>(std::ceil(2.0 * sigma));
    return gaussian_smooth(x, sigma, {r, r, r});
}

}  // namespace jbf
