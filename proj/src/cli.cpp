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

#include "jbf/cli.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <vector>

#include "jbf/gradcheck.hpp"
#include "jbf/metrics.hpp"
#include "jbf/optim.hpp"
#include "jbf/pipeline.hpp"
#include "jbf/volume.hpp"

namespace jbf::cli {

namespace fs = std::filesystem;

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

void require_volume(const Path& p, const char* what) {
    if (!fs::exists(sidecar_path(p)) || !fs::exists(payload_path(p))) {
        throw UsageError(std::string(what) + " volume not found: " + p.string());
    }
}

void require_file(const Path& p, const char* what) {
    if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

void require_dir(const Path& p, const char* what) {
    if (!fs::is_directory(p)) throw UsageError(std::string(what) + " is not a directory: " + p.string());
}

Dims parse_dims(const std::string& text) {
    const auto t = parse_triple(text);
    if (t[0] <= 0 || t[1] <= 0 || t[2] <= 0) throw UsageError("dims must be positive: " + text);
    return {t[0], t[1], t[2]};
}

Window parse_window(const std::string& text) {
    const auto t = parse_triple(text);
    for (auto r : t) {
        if (r < 0 || r > 64) throw UsageError("radii must be in [0, 64]: " + text);
    }
    return Window{{static_cast<int>(t[0]), static_cast<int>(t[1]), static_cast<int>(t[2])}};
}

// Volume stems in `dir`, sorted by name.
std::vector<std::string> volume_stems(const Path& dir) {
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            stems.push_back(entry.path().stem().string());
        }
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

std::vector<std::string> paired_stems(const Path& a, const Path& b) {
    const auto sa = volume_stems(a);
    const auto sb = volume_stems(b);
    if (sa.empty()) throw std::runtime_error("no volumes found in " + a.string());
    std::vector<std::string> only_a, only_b;
    std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(only_a));
    std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(), std::back_inserter(only_b));
    if (!only_a.empty() || !only_b.empty()) {
        std::string name = !only_a.empty() ? only_a.front() : only_b.front();
        throw std::runtime_error("unpaired volume '" + name + "' between " + a.string() + " and " + b.string());
    }
    return sa;
}

std::vector<TrainingPair> load_pairs(const Path& noisy_dir, const Path& target_dir,
                                     const std::optional<Path>& guide_dir) {
    std::vector<TrainingPair> pairs;
    for (const auto& stem : paired_stems(noisy_dir, target_dir)) {
        TrainingPair p{load_volume(noisy_dir / stem), load_volume(target_dir / stem), std::nullopt};
        if (!(p.noisy.dims() == p.target.dims())) {
            throw std::runtime_error("dims mismatch for pair '" + stem + "'");
        }
        if (guide_dir) {
            if (!fs::exists(sidecar_path(*guide_dir / stem))) {
                throw std::runtime_error("no guide volume for '" + stem + "' in " + guide_dir->string());
            }
            p.guide = load_volume(*guide_dir / stem);
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

double mean_rmse(const std::vector<TrainingPair>& pairs, const PipelineState* state) {
    double sum = 0.0;
    for (const auto& p : pairs) {
        if (state == nullptr) {
            sum += rmse(p.noisy, p.target);
        } else {
            const Volume guide = resolve_guide(p.noisy, *state, p.guide);
            sum += rmse(pipeline_forward(p.noisy, guide, *state).prediction(), p.target);
        }
    }
    return sum / static_cast<double>(pairs.size());
}

nlohmann::json dims_json(const Dims& d) { return {d.nx, d.ny, d.nz}; }

}  // namespace

std::array<std::int64_t, 3> parse_triple(const std::string& text) {
    std::array<std::int64_t, 3> out{};
    std::stringstream ss(text);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= 3) throw UsageError("expected three comma-separated integers, got '" + text + "'");
        try {
            std::size_t used = 0;
            out[static_cast<std::size_t>(i)] = std::stoll(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("expected three comma-separated integers, got '" + text + "'");
        }
        ++i;
    }
    if (i != 3) throw UsageError("expected three comma-separated integers, got '" + text + "'");
    return out;
}

Path phantom_clean_path(const Path& prefix) { return Path(prefix.string() + "_clean"); }
Path phantom_noisy_path(const Path& prefix) { return Path(prefix.string() + "_noisy"); }

int cmd_denoise(const DenoiseOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require_volume(o.input, "input");
        require_file(o.params, "parameter file");
        if (o.target) require_volume(*o.target, "target");
        PipelineState state;
        try {
            state = load_pipeline(o.params);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (state.guide_mode == GuideMode::file && !o.guide) {
            throw UsageError("guide mode 'file' requires --guide");
        }
        if (state.guide_mode != GuideMode::file && o.guide) {
            throw UsageError("--guide given but the parameter file uses guide mode '" + to_string(state.guide_mode) +
                             "'");
        }
        if (o.guide) require_volume(*o.guide, "guide");

        const Volume x = load_volume(o.input);
        std::optional<Volume> guide_file;
        if (o.guide) guide_file = load_volume(*o.guide);
        const Volume guide = resolve_guide(x, state, guide_file);
        const Volume y = pipeline_forward(x, guide, state).prediction();
        save_volume(y, o.output);

        nlohmann::json report = {{"output", o.output.string()}, {"dims", dims_json(y.dims())},
                                 {"layers", state.layers.size()}};
        if (o.target) {
            const Volume t = load_volume(*o.target);
            report["metrics"] = to_json(evaluate(y, t, o.data_range, o.ssim_radius));
            report["input_metrics"] = to_json(evaluate(x, t, o.data_range, o.ssim_radius));
        }
        out << report.dump(2) << "\n";
        return kOk;
    });
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require_dir(o.noisy_dir, "--noisy-dir");
        require_dir(o.target_dir, "--target-dir");
        if (o.guide_dir) require_dir(*o.guide_dir, "--guide-dir");
        if (o.init_params) require_file(*o.init_params, "--init-params");
        if (o.val_noisy_dir.has_value() != o.val_target_dir.has_value()) {
            throw UsageError("--val-noisy-dir and --val-target-dir go together");
        }
        if (o.epochs < 0) throw UsageError("--epochs must be >= 0");
        if (o.layers < 1) throw UsageError("--layers must be >= 1");

        TrainConfig cfg{o.lr_range, o.lr_spatial, o.epochs, o.seed, o.sigma_min};
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }

        PipelineState init;
        if (o.init_params) {
            init = load_pipeline(*o.init_params);
        } else {
            GuideMode mode;
            try {
                mode = parse_guide_mode(o.guide_mode);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            init.guide_mode = mode;
            init.gauss_sigma = mode == GuideMode::gauss ? o.gauss_sigma : 0.0;
        }
        if ((init.guide_mode == GuideMode::file) != o.guide_dir.has_value()) {
            throw UsageError("--guide-dir is required exactly when the guide mode is 'file'");
        }

        const auto pairs = load_pairs(o.noisy_dir, o.target_dir, o.guide_dir);
        if (!o.init_params) {
            const double sr = o.sigma_r_init.value_or(default_sigma_r(pairs));
            const FilterParams p{o.sigma_s_init, o.sigma_s_init, o.sigma_s_init, sr};
            try {
                p.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            init.layers.assign(static_cast<std::size_t>(o.layers), p);
            init.window = o.radii ? parse_window(*o.radii) : Window::from_sigmas(p);
            init.validate();
        }

        auto log_epoch = [&](int epoch, double loss, const PipelineState&) {
            if (!o.quiet) err << "epoch " << epoch << "/" << o.epochs << " mean_train_mse " << loss << "\n";
        };
        const TrainResult result = train(pairs, init, cfg, log_epoch);
        save_pipeline(result.state, o.out_params);
        save_loss_csv(result.loss_history, o.loss_csv);

        nlohmann::json report = {
            {"epochs", o.epochs},
            {"pairs", pairs.size()},
            {"params", o.out_params.string()},
            {"loss_csv", o.loss_csv.string()},
            {"train_input_rmse", mean_rmse(pairs, nullptr)},
            {"train_denoised_rmse", mean_rmse(pairs, &result.state)},
        };
        if (!result.loss_history.empty()) {
            report["first_epoch_mse"] = result.loss_history.front();
            report["final_epoch_mse"] = result.loss_history.back();
        }
        if (o.val_noisy_dir) {
            const auto val = load_pairs(*o.val_noisy_dir, *o.val_target_dir, std::nullopt);
            if (result.state.guide_mode == GuideMode::file) {
                throw UsageError("held-out evaluation is not supported in guide mode 'file'");
            }
            report["val_input_rmse"] = mean_rmse(val, nullptr);
            report["val_denoised_rmse"] = mean_rmse(val, &result.state);
        }
        out << report.dump(2) << "\n";
        return kOk;
    });
}

int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        GradCheckConfig cfg;
        cfg.dims = parse_dims(o.dims);
        cfg.window = parse_window(o.radii);
        cfg.params = o.params;
        cfg.layers = o.layers;
        cfg.seed = o.seed;
        cfg.tolerance = o.tolerance;
        if (cfg.dims.count() > 8 * 8 * 4) throw UsageError("--dims too large for a finite-difference check (max 256 voxels)");
        if (cfg.layers < 1) throw UsageError("--layers must be >= 1");
        if (!(o.tolerance >= 0.0)) throw UsageError("--tolerance must be >= 0");
        try {
            cfg.params.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }

        const GradCheckReport r = gradcheck(cfg);
        if (o.json) {
            out << to_json(r).dump(2) << "\n";
        } else {
            out << std::left << std::setw(18) << "quantity" << std::setw(14) << "max_rel" << std::setw(14)
                << "max_abs" << "step\n";
            out << std::setprecision(4) << std::scientific;
            for (const auto& q : r.quantities) {
                out << std::setw(18) << q.name << std::setw(14) << q.max_rel << std::setw(14) << q.max_abs << q.step
                    << "\n";
            }
            out << (r.pass ? "PASS" : "FAIL") << " max_rel=" << r.max_rel << " tolerance=" << r.tolerance << "\n";
            out << std::defaultfloat;
        }
        return r.pass ? kOk : kFailure;
    });
}

int cmd_metrics(const MetricsOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require_volume(o.a, "first");
        require_volume(o.b, "reference");
        std::optional<Roi> roi;
        if (o.roi) {
            try {
                roi = parse_roi(*o.roi);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }
        Volume a = load_volume(o.a);
        Volume b = load_volume(o.b);
        if (!(a.dims() == b.dims())) {
            throw std::runtime_error("dims mismatch " + to_string(a.dims()) + " vs " + to_string(b.dims()));
        }
        if (roi) {
            if (!roi->fits(a.dims())) throw std::runtime_error("ROI exceeds volume bounds " + to_string(a.dims()));
            a = crop(a, *roi);
            b = crop(b, *roi);
        }
        const MetricsReport r = evaluate(a, b, o.data_range, o.ssim_radius);
        if (o.csv) {
            out << csv_header() << "\n" << csv_row(o.label, r) << "\n";
        } else {
            out << to_json(r).dump(2) << "\n";
        }
        return kOk;
    });
}

int cmd_phantom(const PhantomOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Dims dims = parse_dims(o.dims);
        if (!(o.noise >= 0.0)) throw UsageError("--noise must be >= 0");
        if (o.out_prefix.empty()) throw UsageError("--out is required");
        const PhantomPair p = make_phantom(dims, o.seed, o.noise);
        save_volume(p.clean, phantom_clean_path(o.out_prefix));
        save_volume(p.noisy, phantom_noisy_path(o.out_prefix));
        nlohmann::json report = {{"clean", phantom_clean_path(o.out_prefix).string()},
                                 {"noisy", phantom_noisy_path(o.out_prefix).string()},
                                 {"dims", dims_json(dims)},
                                 {"seed", o.seed},
                                 {"noise", o.noise}};
        out << report.dump(2) << "\n";
        return kOk;
    });
}

int cmd_export_slice(const SliceOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require_volume(o.input, "input");
        if (!(o.window_hi > o.window_lo)) throw UsageError("--window-hi must exceed --window-lo");
        const Volume v = load_volume(o.input);
        if (o.slice < 0 || o.slice >= v.dims().nz) throw UsageError("--slice out of range");
        export_slice_pgm(v, o.slice, o.window_lo, o.window_hi, o.output);
        out << o.output.string() << "\n";
        return kOk;
    });
}

}  // namespace jbf::cli
