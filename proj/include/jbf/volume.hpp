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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace jbf {

/// Grid extent of a volume. x is the fastest-varying axis.
struct Dims {
    std::int64_t nx = 0;
    std::int64_t ny = 0;
    std::int64_t nz = 0;

    std::int64_t count() const { return nx * ny * nz; }
    bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

/// Dense 3-D scalar field in 64-bit working precision.
///
/// Storage is flat with index(x, y, z) = x + nx * (y + ny * z). Every public
/// constructor rejects non-finite values, so a Volume handed out by this
/// library always holds finite data.
class Volume {
  public:
    Volume() = default;
    /// Zero-filled volume.
    explicit Volume(Dims dims);
    Volume(Dims dims, double fill);
    Volume(Dims dims, std::vector<double> data);

    const Dims& dims() const { return dims_; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return x + dims_.nx * (y + dims_.ny * z);
    }

    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double at(std::int64_t x, std::int64_t y, std::int64_t z) const { return (*this)[index(x, y, z)]; }
    double& at(std::int64_t x, std::int64_t y, std::int64_t z) { return (*this)[index(x, y, z)]; }

    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

    double min() const;
    double max() const;
    bool all_finite() const;

    bool operator==(const Volume&) const = default;

  private:
    Dims dims_{};
    std::vector<double> data_;
};

/// Axis-aligned half-open box [origin, origin + extent).
struct Roi {
    std::array<std::int64_t, 3> origin{0, 0, 0};
    std::array<std::int64_t, 3> extent{0, 0, 0};

    bool fits(const Dims& d) const;
};

/// Parses "x0,y0,z0,dx,dy,dz".
Roi parse_roi(const std::string& text);

Volume crop(const Volume& v, const Roi& roi);

/// Reads `<stem>.json` + `<stem>.raw`. `path` may name either file or the
/// bare stem.
Volume load_volume(const std::filesystem::path& path);

/// Writes little-endian float32 payload and JSON sidecar. Both files are
/// written to temporaries and renamed into place on success.
void save_volume(const Volume& v, const std::filesystem::path& path);

/// Sidecar/payload paths for a volume stem.
std::filesystem::path sidecar_path(const std::filesystem::path& path);
std::filesystem::path payload_path(const std::filesystem::path& path);

/// Binary 16-bit PGM of slice `z`; [window_lo, window_hi] maps linearly to
/// [0, 65535] with clamping outside.
void export_slice_pgm(const Volume& v, std::int64_t z, double window_lo, double window_hi,
                      const std::filesystem::path& path);

struct PhantomPair {
    Volume clean;
    Volume noisy;
};

/// Piecewise-constant ellipsoid phantom with additive Gaussian noise.
PhantomPair make_phantom(Dims dims, std::uint64_t seed, double noise_sigma);

/// Writes `bytes` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::span<const char> bytes);

}  // namespace jbf
