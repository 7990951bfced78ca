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

#include "jbf/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "kernel_common.hpp"

namespace jbf {

double rmse(const Volume& a, const Volume& b) {
    detail::require_same_dims(a, b, "rmse");
    double sum = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.size()));
}

double psnr(const Volume& a, const Volume& b, double data_range) {
    if (!(data_range > 0.0) || !std::isfinite(data_range)) throw std::invalid_argument("psnr: data_range must be > 0");
    const double e = rmse(a, b);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(data_range) - 20.0 * std::log10(e);
}

double ssim(const Volume& a, const Volume& b, double data_range, int window_radius) {
    detail::require_same_dims(a, b, "ssim");
    if (!(data_range > 0.0) || !std::isfinite(data_range)) throw std::invalid_argument("ssim: data_range must be > 0");
    if (window_radius < 0) throw std::invalid_argument("ssim: window radius must be >= 0");
    const Dims d = a.dims();
    const int r = window_radius;
    if (2 * r + 1 > d.nx || 2 * r + 1 > d.ny) {
        throw std::invalid_argument("ssim: window of radius " + std::to_string(r) + " does not fit a " +
                                    std::to_string(d.nx) + "x" + std::to_string(d.ny) + " slice");
    }

    const std::size_t side = static_cast<std::size_t>(2 * r + 1);
    std::vector<double> win(side * side);
    double total = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * kSsimWindowSigma * kSsimWindowSigma));
            win[static_cast<std::size_t>((dy + r) * (2 * r + 1) + dx + r)] = g;
            total += g;
        }
    }
    for (double& g : win) g /= total;

    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);
    const std::int64_t vx = d.nx - 2 * r;
    const std::int64_t vy = d.ny - 2 * r;
    const std::int64_t rows = vy * d.nz;
    std::vector<double> row_sum(static_cast<std::size_t>(rows));

#pragma omp parallel for schedule(static)
    for (std::int64_t row = 0; row < rows; ++row) {
        const std::int64_t cy = r + row % vy;
        const std::int64_t cz = row / vy;
        double acc = 0.0;
        for (std::int64_t cx = r; cx < d.nx - r; ++cx) {
            double mu_a = 0.0, mu_b = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const double g = win[static_cast<std::size_t>((dy + r) * (2 * r + 1) + dx + r)];
                    mu_a += g * a.at(cx + dx, cy + dy, cz);
                    mu_b += g * b.at(cx + dx, cy + dy, cz);
                }
            }
            double var_a = 0.0, var_b = 0.0, cov = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const double g = win[static_cast<std::size_t>((dy + r) * (2 * r + 1) + dx + r)];
                    const double ea = a.at(cx + dx, cy + dy, cz) - mu_a;
                    const double eb = b.at(cx + dx, cy + dy, cz) - mu_b;
                    var_a += g * ea * ea;
                    var_b += g * eb * eb;
                    cov += g * ea * eb;
                }
            }
            const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            acc += num / den;
        }
        row_sum[static_cast<std::size_t>(row)] = acc;
    }
    double sum = 0.0;
    for (double s : row_sum) sum += s;
    return sum / static_cast<double>(vx * vy * d.nz);
}

MetricsReport evaluate(const Volume& a, const Volume& b, std::optional<double> data_range, int ssim_radius) {
    const double range = data_range.value_or(b.max() - b.min());
    if (!(range > 0.0)) {
        throw std::invalid_argument("data range is zero (constant reference volume); pass an explicit data range");
    }
    MetricsReport r;
    r.rmse = rmse(a, b);
    r.psnr = psnr(a, b, range);
    r.ssim = ssim(a, b, range, ssim_radius);
    r.n_voxels = a.size();
    return r;
}

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["rmse"] = r.rmse;
    if (std::isinf(r.psnr)) {
        j["psnr"] = "inf";
    } else {
        j["psnr"] = r.psnr;
    }
    j["ssim"] = r.ssim;
    j["n_voxels"] = r.n_voxels;
    return j;
}

std::string csv_header() { return "label,rmse,psnr,ssim,n_voxels"; }

std::string csv_row(const std::string& label, const MetricsReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << label << "," << r.rmse << ",";
    if (std::isinf(r.psnr)) {
        os << "inf";
    } else {
        os << r.psnr;
    }
    os << "," << r.ssim << "," << r.n_voxels;
    return os.str();
}

}  // namespace jbf
