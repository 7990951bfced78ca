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

#include "jbf/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace jbf {

namespace fs = std::filesystem;

std::string to_string(const Dims& d) {
    std::ostringstream os;
    os << d.nx << "x" << d.ny << "x" << d.nz;
    return os.str();
}

namespace {

void check_dims(const Dims& d) {
    if (d.nx <= 0 || d.ny <= 0 || d.nz <= 0) {
        throw std::invalid_argument("volume dims must be positive, got " + to_string(d));
    }
}

void check_finite(std::span<const double> data) {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("volume contains non-finite values");
        }
    }
}

}  // namespace

Volume::Volume(Dims dims) : Volume(dims, 0.0) {}

Volume::Volume(Dims dims, double fill) : dims_(dims) {
    check_dims(dims);
    if (!std::isfinite(fill)) {
        throw std::invalid_argument("volume fill value must be finite");
    }
    data_.assign(static_cast<std::size_t>(dims.count()), fill);
}

Volume::Volume(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    check_dims(dims);
    if (static_cast<std::int64_t>(data_.size()) != dims.count()) {
        throw std::invalid_argument("volume data length " + std::to_string(data_.size()) +
                                    " does not match dims " + to_string(dims));
    }
    check_finite(data_);
}

double Volume::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Volume::max() const { return *std::max_element(data_.begin(), data_.end()); }

bool Volume::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Roi::fits(const Dims& d) const {
    const std::array<std::int64_t, 3> n{d.nx, d.ny, d.nz};
    for (int a = 0; a < 3; ++a) {
        if (origin[a] < 0 || extent[a] <= 0 || origin[a] + extent[a] > n[a]) return false;
    }
    return true;
}

Roi parse_roi(const std::string& text) {
    std::vector<std::int64_t> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stoll(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad ROI component '" + tok + "'");
        }
    }
    if (v.size() != 6) {
        throw std::invalid_argument("ROI must be x0,y0,z0,dx,dy,dz");
    }
    return Roi{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

Volume crop(const Volume& v, const Roi& roi) {
    if (!roi.fits(v.dims())) {
        throw std::out_of_range("ROI exceeds volume bounds " + to_string(v.dims()));
    }
    const Dims out_dims{roi.extent[0], roi.extent[1], roi.extent[2]};
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(out_dims.count()));
    for (std::int64_t z = 0; z < out_dims.nz; ++z) {
        for (std::int64_t y = 0; y < out_dims.ny; ++y) {
            for (std::int64_t x = 0; x < out_dims.nx; ++x) {
                out.push_back(v.at(x + roi.origin[0], y + roi.origin[1], z + roi.origin[2]));
            }
        }
    }
    return Volume(out_dims, std::move(out));
}

fs::path sidecar_path(const fs::path& path) {
    fs::path p = path;
    if (p.extension() == ".raw" || p.extension() == ".json") p.replace_extension();
    p += ".json";
    return p;
}

fs::path payload_path(const fs::path& path) {
    fs::path p = path;
    if (p.extension() == ".raw" || p.extension() == ".json") p.replace_extension();
    p += ".raw";
    return p;
}

namespace {

std::uint32_t to_little(std::uint32_t w) {
    if constexpr (std::endian::native == std::endian::big) {
        return ((w & 0xffu) << 24) | ((w & 0xff00u) << 8) | ((w >> 8) & 0xff00u) | (w >> 24);
    }
    return w;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path temp_sibling(const fs::path& p) {
    fs::path t = p;
    t += ".tmp";
    return t;
}

void write_raw(const fs::path& p, std::span<const char> bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

void write_file_atomic(const fs::path& path, std::span<const char> bytes) {
    const fs::path tmp = temp_sibling(path);
    write_raw(tmp, bytes);
    fs::rename(tmp, path);
}

Volume load_volume(const fs::path& path) {
    const fs::path header = sidecar_path(path);
    const fs::path payload = payload_path(path);

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_all(header));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("corrupt volume header " + header.string() + ": " + e.what());
    }
    Dims dims;
    try {
        const auto& d = meta.at("dims");
        if (!d.is_array() || d.size() != 3) throw std::runtime_error("dims must have 3 entries");
        dims = Dims{d[0].get<std::int64_t>(), d[1].get<std::int64_t>(), d[2].get<std::int64_t>()};
        if (meta.value("dtype", "f32") != "f32") throw std::runtime_error("dtype must be f32");
        if (meta.value("order", "x-fastest") != "x-fastest") throw std::runtime_error("order must be x-fastest");
        if (meta.value("endian", "little") != "little") throw std::runtime_error("endian must be little");
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid volume header " + header.string() + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("invalid volume header " + header.string() + ": " + e.what());
    }
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
        throw std::runtime_error("invalid volume header " + header.string() + ": non-positive dims");
    }

    const std::string bytes = read_all(payload);
    const auto expected = static_cast<std::size_t>(dims.count()) * sizeof(float);
    if (bytes.size() != expected) {
        throw std::runtime_error("payload " + payload.string() + " has " + std::to_string(bytes.size()) +
                                 " bytes, header " + to_string(dims) + " requires " + std::to_string(expected));
    }
    std::vector<double> data(static_cast<std::size_t>(dims.count()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint32_t w;
        std::memcpy(&w, bytes.data() + i * sizeof(float), sizeof w);
        const float f = std::bit_cast<float>(to_little(w));
        if (!std::isfinite(f)) {
            throw std::runtime_error("payload " + payload.string() + " contains non-finite values");
        }
        data[i] = static_cast<double>(f);
    }
    return Volume(dims, std::move(data));
}

void save_volume(const Volume& v, const fs::path& path) {
    if (v.size() == 0) throw std::invalid_argument("cannot save an empty volume");
    std::vector<char> bytes(static_cast<std::size_t>(v.size()) * sizeof(float));
    for (std::int64_t i = 0; i < v.size(); ++i) {
        const auto f = static_cast<float>(v[i]);
        if (!std::isfinite(f)) {
            throw std::invalid_argument("refusing to save non-finite value at index " + std::to_string(i));
        }
        const std::uint32_t w = to_little(std::bit_cast<std::uint32_t>(f));
        std::memcpy(bytes.data() + static_cast<std::size_t>(i) * sizeof(float), &w, sizeof w);
    }
    const nlohmann::json meta = {
        {"dims", {v.dims().nx, v.dims().ny, v.dims().nz}},
        {"dtype", "f32"},
        {"order", "x-fastest"},
        {"endian", "little"},
    };
    const std::string header = meta.dump() + "\n";

    const fs::path raw = payload_path(path);
    const fs::path json = sidecar_path(path);
    write_raw(temp_sibling(raw), bytes);
    write_raw(temp_sibling(json), std::span<const char>(header.data(), header.size()));
    fs::rename(temp_sibling(raw), raw);
    fs::rename(temp_sibling(json), json);
}

void export_slice_pgm(const Volume& v, std::int64_t z, double window_lo, double window_hi, const fs::path& path) {
    if (z < 0 || z >= v.dims().nz) throw std::out_of_range("slice index out of range");
    if (!(window_hi > window_lo)) throw std::invalid_argument("PGM window must satisfy lo < hi");
    const auto nx = v.dims().nx;
    const auto ny = v.dims().ny;
    std::string out = "P5\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n65535\n";
    out.reserve(out.size() + static_cast<std::size_t>(nx * ny * 2));
    for (std::int64_t y = 0; y < ny; ++y) {
        for (std::int64_t x = 0; x < nx; ++x) {
            const double t = std::clamp((v.at(x, y, z) - window_lo) / (window_hi - window_lo), 0.0, 1.0);
            const auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
            out.push_back(static_cast<char>(q >> 8));  // PGM is big-endian
            out.push_back(static_cast<char>(q & 0xff));
        }
    }
    write_file_atomic(path, std::span<const char>(out.data(), out.size()));
}

}  // namespace jbf
