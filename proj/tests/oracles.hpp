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

// Test-only oracles. Written deliberately plainly: no lookup tables, no
// shared helpers with the library kernels, straight loops over raw arrays.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "jbf/volume.hpp"

namespace jbf::oracle {

struct Grid {
    int nx, ny, nz;
    std::vector<double> v;

    double get(int x, int y, int z) const { return v[static_cast<std::size_t>(x + nx * (y + ny * z))]; }
};

inline Grid grid_of(const Volume& vol) {
    return Grid{static_cast<int>(vol.dims().nx), static_cast<int>(vol.dims().ny), static_cast<int>(vol.dims().nz),
                std::vector<double>(vol.values().begin(), vol.values().end())};
}

/// Term-by-term joint bilateral filter: Y_k = sum(G_s G_r X_n) / sum(G_s G_r).
inline std::vector<double> naive_jbf(const Volume& xv, const Volume& zv, double sx, double sy, double sz, double sr,
                                     int rx, int ry, int rz) {
    const Grid X = grid_of(xv), Z = grid_of(zv);
    std::vector<double> out;
    for (int k3 = 0; k3 < X.nz; ++k3)
        for (int k2 = 0; k2 < X.ny; ++k2)
            for (int k1 = 0; k1 < X.nx; ++k1) {
                double num = 0, den = 0;
                for (int o3 = -rz; o3 <= rz; ++o3)
                    for (int o2 = -ry; o2 <= ry; ++o2)
                        for (int o1 = -rx; o1 <= rx; ++o1) {
                            const int n1 = k1 + o1, n2 = k2 + o2, n3 = k3 + o3;
                            if (n1 < 0 || n2 < 0 || n3 < 0 || n1 >= X.nx || n2 >= X.ny || n3 >= X.nz) continue;
                            const double spatial = std::exp(-0.5 * o1 * o1 / (sx * sx) - 0.5 * o2 * o2 / (sy * sy) -
                                                            0.5 * o3 * o3 / (sz * sz));
                            const double c = Z.get(k1, k2, k3) - Z.get(n1, n2, n3);
                            const double range = std::exp(-0.5 * c * c / (sr * sr));
                            num += spatial * range * X.get(n1, n2, n3);
                            den += spatial * range;
                        }
                out.push_back(num / den);
            }
    return out;
}

/// Classical bilateral filter (range kernel on the image itself), 1-D
/// spatial distance as Euclidean over anisotropic axes.
inline std::vector<double> brute_bilateral(const Volume& img, double sx, double sy, double sz, double sr, int rx,
                                           int ry, int rz) {
    const Grid I = grid_of(img);
    std::vector<double> out(I.v.size());
    std::size_t idx = 0;
    for (int z = 0; z < I.nz; ++z)
        for (int y = 0; y < I.ny; ++y)
            for (int x = 0; x < I.nx; ++x) {
                const double centre = I.get(x, y, z);
                double acc = 0, norm = 0;
                for (int zz = std::max(0, z - rz); zz <= std::min(I.nz - 1, z + rz); ++zz)
                    for (int yy = std::max(0, y - ry); yy <= std::min(I.ny - 1, y + ry); ++yy)
                        for (int xx = std::max(0, x - rx); xx <= std::min(I.nx - 1, x + rx); ++xx) {
                            const double d2 = (xx - x) * (xx - x) / (sx * sx) + (yy - y) * (yy - y) / (sy * sy) +
                                              (zz - z) * (zz - z) / (sz * sz);
                            const double dv = I.get(xx, yy, zz) - centre;
                            const double wgt = std::exp(-0.5 * d2) * std::exp(-0.5 * dv * dv / (sr * sr));
                            acc += wgt * I.get(xx, yy, zz);
                            norm += wgt;
                        }
                out[idx++] = acc / norm;
            }
    return out;
}

/// Direct 3-D normalized truncated Gaussian convolution.
inline std::vector<double> direct_blur(const Volume& img, double sigma, int r) {
    return brute_bilateral(img, sigma, sigma, sigma, 1e300, r, r, r);
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / a.size());
}

inline double psnr(const std::vector<double>& a, const std::vector<double>& b, double range) {
    return 10.0 * std::log10(range * range / (rmse(a, b) * rmse(a, b)));
}

/// SSIM per slice with raw-moment statistics, valid window centres only.
inline double ssim(const Volume& av, const Volume& bv, double range, int r) {
    const Grid A = grid_of(av), B = grid_of(bv);
    const double k1 = 0.01 * range, k2 = 0.03 * range;
    double total = 0;
    long count = 0;
    for (int z = 0; z < A.nz; ++z)
        for (int y = r; y < A.ny - r; ++y)
            for (int x = r; x < A.nx - r; ++x) {
                double wsum = 0, ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx) {
                        const double g = std::exp(-(dx * dx + dy * dy) / 4.5);
                        const double a = A.get(x + dx, y + dy, z), b = B.get(x + dx, y + dy, z);
                        wsum += g;
                        ma += g * a;
                        mb += g * b;
                        saa += g * a * a;
                        sbb += g * b * b;
                        sab += g * a * b;
                    }
                ma /= wsum;
                mb /= wsum;
                const double va = saa / wsum - ma * ma, vb = sbb / wsum - mb * mb, cab = sab / wsum - ma * mb;
                total += ((2 * ma * mb + k1 * k1) * (2 * cab + k2 * k2)) /
                         ((ma * ma + mb * mb + k1 * k1) * (va + vb + k2 * k2));
                ++count;
            }
    return total / count;
}

struct WilcoxonBrute {
    double w;
    double p;
};

/// Enumerates all 2^n sign flips over average ranks of |d| (zeros dropped).
inline WilcoxonBrute wilcoxon_brute(std::vector<double> d) {
    d.erase(std::remove(d.begin(), d.end(), 0.0), d.end());
    const int n = static_cast<int>(d.size());
    std::vector<double> rank(n);
    for (int i = 0; i < n; ++i) {
        double below = 0, equal = 0;
        for (int j = 0; j < n; ++j) {
            if (std::abs(d[j]) < std::abs(d[i])) below += 1;
            if (std::abs(d[j]) == std::abs(d[i])) equal += 1;
        }
        rank[i] = below + (equal + 1) / 2.0;
    }
    double total = 0, plus = 0;
    for (int i = 0; i < n; ++i) {
        total += rank[i];
        if (d[i] > 0) plus += rank[i];
    }
    const double w = std::min(plus, total - plus);
    long hits = 0;
    for (long mask = 0; mask < (1L << n); ++mask) {
        double s = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1L << i)) s += rank[i];
        if (std::min(s, total - s) <= w + 1e-9) ++hits;
    }
    return {w, static_cast<double>(hits) / static_cast<double>(1L << n)};
}

/// Seven-point central difference of f at 0, error O(h^6).
inline double central_diff(const std::function<double(double)>& f, double h) {
    return (45 * (f(h) - f(-h)) - 9 * (f(2 * h) - f(-2 * h)) + (f(3 * h) - f(-3 * h))) / (60 * h);
}

/// Same stencil, but `gap(e)` returns f(e) - f(-e) computed by the caller,
/// typically voxel by voxel so two large sums never get subtracted.
inline double central_diff_gap(const std::function<double(double)>& gap, double h) {
    return (45 * gap(h) - 9 * gap(2 * h) + gap(3 * h)) / (60 * h);
}

inline double rel_err(double analytical, double numerical) {
    return std::abs(analytical - numerical) / (std::abs(numerical) + 1e-12);
}

inline Volume random_volume(const Dims& d, std::mt19937_64& rng, double lo = -150.0, double hi = 500.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Volume v(d);
    for (double& x : v.values()) x = u(rng);
    return v;
}

struct Blocky {
    Volume x, z, target;
};

/// Piecewise-constant blocks (runs of 3-5 voxels per axis) on levels
/// -150, -100, ..., 500; x and z are the target plus Gaussian noise.
inline Blocky blocky(const Dims& d, std::mt19937_64& rng, double x_noise, double z_noise) {
    const bool all_short = std::max({d.nx, d.ny, d.nz}) < 6;
    auto runs = [&rng, all_short](std::int64_t n) {
        std::vector<int> label(static_cast<std::size_t>(n));
        const int lo = n >= 6 ? 3 : (all_short ? 2 : static_cast<int>(n));
        std::uniform_int_distribution<int> width(lo, lo + 2);
        int b = 0;
        for (std::int64_t s = 0; s < n; ++b) {
            const std::int64_t rest = n - s;
            const std::int64_t len = rest < 2 * lo ? rest : std::min<std::int64_t>(width(rng), rest - lo);
            for (std::int64_t i = s; i < s + len; ++i) label[static_cast<std::size_t>(i)] = b;
            s += len;
        }
        return label;
    };
    const auto bx = runs(d.nx), by = runs(d.ny), bz = runs(d.nz);
    std::uniform_int_distribution<int> level(0, 13);
    std::vector<double> levels(16 * 16 * 16);
    // Neighbouring blocks never share a level.
    for (int c = 0; c < 16; ++c)
        for (int b = 0; b < 16; ++b)
            for (int a = 0; a < 16; ++a) {
                auto lv = [&](int i, int j, int k) { return levels[static_cast<std::size_t>(i + 16 * (j + 16 * k))]; };
                double& l = levels[static_cast<std::size_t>(a + 16 * (b + 16 * c))];
                do {
                    l = -150.0 + 50.0 * level(rng);
                } while ((a > 0 && l == lv(a - 1, b, c)) || (b > 0 && l == lv(a, b - 1, c)) ||
                         (c > 0 && l == lv(a, b, c - 1)));
            }
    std::normal_distribution<double> n(0.0, 1.0);
    Blocky out{Volume(d), Volume(d), Volume(d)};
    for (std::int64_t k = 0; k < d.nz; ++k)
        for (std::int64_t j = 0; j < d.ny; ++j)
            for (std::int64_t i = 0; i < d.nx; ++i) {
                const double c = levels[static_cast<std::size_t>(bx[i] + 16 * (by[j] + 16 * bz[k]))];
                out.target.at(i, j, k) = c;
                out.x.at(i, j, k) = c + x_noise * n(rng);
                out.z.at(i, j, k) = c + z_noise * n(rng);
            }
    return out;
}

}  // namespace jbf::oracle
