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

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jbf/cli.hpp"
#include "jbf/parallel.hpp"

namespace {

// CLI11 has no direct optional<path> binding; go through a string.
struct OptionalPath {
    std::string raw;
    std::optional<std::filesystem::path> get() const {
        if (raw.empty()) return std::nullopt;
        return std::filesystem::path(raw);
    }
};

}  // namespace

int main(int argc, char** argv) {
    using namespace jbf::cli;

    CLI::App app{"Trainable joint bilateral filter: denoise, train, gradcheck, metrics, phantom"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (default: $JBF_NUM_THREADS or all cores)");

    // denoise
    DenoiseOptions den;
    OptionalPath den_guide, den_target;
    std::optional<double> den_range;
    auto* denoise = app.add_subcommand("denoise", "Run a trained filter stack on a volume");
    denoise->add_option("--input", den.input, "Input volume (.json/.raw stem)")->required();
    denoise->add_option("--params", den.params, "Pipeline parameter JSON")->required();
    denoise->add_option("--guide", den_guide.raw, "Guide volume (guide mode 'file' only)");
    denoise->add_option("--output", den.output, "Output volume stem")->required();
    denoise->add_option("--target", den_target.raw, "Reference volume for metrics");
    denoise->add_option("--data-range", den_range, "PSNR/SSIM data range (default: target max - min)");
    denoise->add_option("--ssim-radius", den.ssim_radius, "SSIM window radius");

    // train
    TrainOptions tr;
    OptionalPath tr_guide, tr_init, tr_val_noisy, tr_val_target;
    std::string tr_radii;
    std::optional<double> tr_sigma_r;
    auto* train = app.add_subcommand("train", "Fit the filter sigmas on noisy/target volume pairs");
    train->add_option("--noisy-dir", tr.noisy_dir, "Directory of noisy volumes")->required();
    train->add_option("--target-dir", tr.target_dir, "Directory of target volumes with matching names")->required();
    train->add_option("--guide-dir", tr_guide.raw, "Directory of guide volumes (guide mode 'file')");
    train->add_option("--out-params", tr.out_params, "Trained parameter JSON")->required();
    train->add_option("--loss-csv", tr.loss_csv, "Per-epoch loss CSV")->required();
    train->add_option("--init-params", tr_init.raw, "Start from this parameter JSON");
    train->add_option("--layers", tr.layers, "Number of stacked filter layers");
    train->add_option("--radii", tr_radii, "Window radii rx,ry,rz (default ceil(2 sigma_s), max 7)");
    train->add_option("--guide-mode", tr.guide_mode, "self|file|gauss");
    train->add_option("--gauss-sigma", tr.gauss_sigma, "Smoothing width for guide mode 'gauss'");
    train->add_option("--sigma-s-init", tr.sigma_s_init, "Initial spatial sigma (voxels)");
    train->add_option("--sigma-r-init", tr_sigma_r, "Initial range sigma (default 0.1 x target range)");
    train->add_option("--lr-range", tr.lr_range, "Adam learning rate for range sigmas");
    train->add_option("--lr-spatial", tr.lr_spatial, "Adam learning rate for spatial sigmas");
    train->add_option("--epochs", tr.epochs, "Training epochs");
    train->add_option("--seed", tr.seed, "Sample-order seed");
    train->add_option("--sigma-min", tr.sigma_min, "Lower bound applied to every sigma after each step");
    train->add_option("--val-noisy-dir", tr_val_noisy.raw, "Held-out noisy volumes");
    train->add_option("--val-target-dir", tr_val_target.raw, "Held-out target volumes");
    train->add_flag("--quiet", tr.quiet, "No per-epoch log");

    // gradcheck
    GradcheckOptions gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytical gradients with finite differences");
    gradcheck->add_option("--dims", gc.dims, "Volume dims nx,ny,nz");
    gradcheck->add_option("--radii", gc.radii, "Window radii rx,ry,rz");
    gradcheck->add_option("--sigma-x", gc.params.sigma_x, "Spatial sigma along x (every layer)");
    gradcheck->add_option("--sigma-y", gc.params.sigma_y, "Spatial sigma along y");
    gradcheck->add_option("--sigma-z", gc.params.sigma_z, "Spatial sigma along z");
    gradcheck->add_option("--sigma-r", gc.params.sigma_r, "Range sigma (intensity units)");
    gradcheck->add_option("--layers", gc.layers, "Number of stacked layers");
    gradcheck->add_option("--seed", gc.seed, "Instance seed");
    gradcheck->add_option("--tolerance", gc.tolerance, "Max relative error");
    gradcheck->add_flag("--json", gc.json, "Print the report as JSON");

    // metrics
    MetricsOptions me;
    std::string me_roi;
    std::optional<double> me_range;
    auto* metrics = app.add_subcommand("metrics", "RMSE / PSNR / SSIM between two volumes");
    metrics->add_option("a", me.a, "Volume under test")->required();
    metrics->add_option("b", me.b, "Reference volume")->required();
    metrics->add_option("--roi", me_roi, "x0,y0,z0,dx,dy,dz");
    metrics->add_option("--data-range", me_range, "Data range (default: reference max - min)");
    metrics->add_option("--ssim-radius", me.ssim_radius, "SSIM window radius");
    metrics->add_flag("--csv", me.csv, "CSV instead of JSON");
    metrics->add_option("--label", me.label, "Row label for --csv");

    // phantom
    PhantomOptions ph;
    auto* phantom = app.add_subcommand("phantom", "Write a seeded clean/noisy phantom pair");
    phantom->add_option("--dims", ph.dims, "nx,ny,nz");
    phantom->add_option("--seed", ph.seed, "Seed");
    phantom->add_option("--noise", ph.noise, "Noise standard deviation");
    phantom->add_option("--out", ph.out_prefix, "Output prefix; writes <prefix>_clean and <prefix>_noisy")->required();

    // export-slice
    SliceOptions sl;
    auto* slice = app.add_subcommand("export-slice", "Write one slice as a 16-bit PGM");
    slice->add_option("--input", sl.input, "Volume stem")->required();
    slice->add_option("--slice", sl.slice, "z index");
    slice->add_option("--window-lo", sl.window_lo, "Intensity mapped to 0");
    slice->add_option("--window-hi", sl.window_hi, "Intensity mapped to 65535");
    slice->add_option("--output", sl.output, "PGM path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    jbf::set_num_threads(threads);

    if (*denoise) {
        den.guide = den_guide.get();
        den.target = den_target.get();
        den.data_range = den_range;
        return cmd_denoise(den, std::cout, std::cerr);
    }
    if (*train) {
        tr.guide_dir = tr_guide.get();
        tr.init_params = tr_init.get();
        tr.val_noisy_dir = tr_val_noisy.get();
        tr.val_target_dir = tr_val_target.get();
        if (!tr_radii.empty()) tr.radii = tr_radii;
        tr.sigma_r_init = tr_sigma_r;
        return cmd_train(tr, std::cout, std::cerr);
    }
    if (*gradcheck) return cmd_gradcheck(gc, std::cout, std::cerr);
    if (*metrics) {
        if (!me_roi.empty()) me.roi = me_roi;
        me.data_range = me_range;
        return cmd_metrics(me, std::cout, std::cerr);
    }
    if (*phantom) return cmd_phantom(ph, std::cout, std::cerr);
    if (*slice) return cmd_export_slice(sl, std::cout, std::cerr);
    return kUsage;
}
