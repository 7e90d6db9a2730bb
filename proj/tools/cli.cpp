#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "svtv/image_io.hpp"
#include "theory_report.hpp"

namespace svtv::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    std::string sinogram;
    std::string weights;
    std::string init;
    std::string input;
    std::vector<std::string> images;
};

RunConfig load(const Options& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : parse_config(o.config);
    if (o.seed) cfg.noise.seed = *o.seed;
    if (!o.out.empty()) cfg.output_dir = o.out;
    return cfg;
}

fs::path prepare_out(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    return cfg.output_dir;
}

// Images go out twice: lossless raw for the next stage, 16-bit PGM for viewing.
void write_both(const Image& img, const fs::path& dir, const std::string& stem) {
    write_image(img, dir / (stem + ".img"), ImageFormat::raw_f64);
    write_image(img, dir / (stem + ".pgm"), ImageFormat::pgm16);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
}

std::string slug(std::string method) {
    std::transform(method.begin(), method.end(), method.begin(), [](unsigned char c) {
        return c == ' ' || c == '-' ? '_' : static_cast<char>(std::tolower(c));
    });
    return method;
}

Sinogram read_matching_sinogram(const std::string& path, const Geometry& geom) {
    Sinogram y = read_sinogram(path);
    require(y.n_angles == geom.n_angles() && y.n_detectors == geom.n_detectors,
            "sinogram " + path + " is " + std::to_string(y.n_angles) + "x" + std::to_string(y.n_detectors) +
                ", geometry expects " + std::to_string(geom.n_angles()) + "x" + std::to_string(geom.n_detectors));
    return y;
}

std::string or_default(const std::string& v, const fs::path& dir, const char* name) {
    return v.empty() ? (dir / name).string() : v;
}

int cmd_phantom(const Options& o, std::ostream& out) {
    const RunConfig cfg = load(o);
    const auto dir = prepare_out(cfg);
    write_both(ground_truth(cfg), dir, "phantom");
    out << "wrote " << (dir / "phantom.img").string() << '\n';
    return 0;
}

int cmd_sinogram(const Options& o, std::ostream& out, std::ostream& err) {
    RunConfig cfg = load(o);
    const auto dir = prepare_out(cfg);
    const Geometry geom = cfg.geometry();
    const SparseOperator K = load_or_build_projector(cfg);
    const Image gt = o.input.empty() ? ground_truth(cfg) : read_image(o.input, cfg.image_side);
    const auto sim = simulate_sinogram(gt, K, geom.n_angles(), geom.n_detectors, cfg.noise);
    if (sim.zero_signal_warning) err << "warning: K x is zero; no noise was added\n";
    write_sinogram(sim.noisy, dir / "sinogram.img");
    write_sinogram(sim.clean, dir / "sinogram_clean.img");
    char buf[96];
    std::snprintf(buf, sizeof buf, "nu=%.17g delta=%.17g", cfg.noise.nu, sim.delta);
    out << buf << '\n';
    return 0;
}

int cmd_reconstruct(const Options& o, std::ostream& out) {
    const RunConfig cfg = load(o);
    const auto dir = prepare_out(cfg);
    const Geometry geom = cfg.geometry();
    const SparseOperator K = load_or_build_projector(cfg);
    const Sinogram y = read_matching_sinogram(or_default(o.sinogram, dir, "sinogram.img"), geom);
    std::optional<Image> gt;
    if (cfg.reconstructor.kind == ReconstructorKind::gt) gt = ground_truth(cfg);
    ReconstructorContext ctx{&geom, &K, gt ? &*gt : nullptr, cfg.boundary, 0.0};
    write_both(reconstruct(cfg.reconstructor, y, ctx), dir, "x_tilde");
    out << "wrote " << (dir / "x_tilde.img").string() << " (" << cfg.reconstructor.id() << ")\n";
    return 0;
}

int cmd_weights(const Options& o, std::ostream& out) {
    const RunConfig cfg = load(o);
    const auto dir = prepare_out(cfg);
    const Image x_tilde = read_image(or_default(o.input, dir, "x_tilde.img"), cfg.image_side);
    const auto map = compute_weights(x_tilde, cfg.weights, cfg.boundary);
    write_both(Image(x_tilde.rows, x_tilde.cols, map.w), dir, "weights");
    out << "wrote " << (dir / "weights.img").string() << '\n';
    return 0;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load(o);
    const auto dir = prepare_out(cfg);
    const Geometry geom = cfg.geometry();
    const SparseOperator K = load_or_build_projector(cfg);
    const GradientOperator D(cfg.image_side, cfg.image_side, cfg.boundary);
    const Sinogram y = read_matching_sinogram(or_default(o.sinogram, dir, "sinogram.img"), geom);
    std::vector<double> w;
    if (!o.weights.empty()) w = read_image(o.weights, cfg.image_side).pixels;
    std::vector<double> x0;
    if (!o.init.empty()) x0 = read_image(o.init, cfg.image_side).pixels;
    const auto result = cp_solve(K, D, y.values, w, cfg.solver, x0);
    if (result.trace.step_warning) err << "warning: sigma * tau * ||M||^2 > 1\n";
    write_both(Image(cfg.image_side, cfg.image_side, result.x), dir, "solution");
    write_trace_csv(result.trace, dir / "trace.csv");
    const auto obj = objective(result.x, y.values, K, D, w, cfg.solver.lambda);
    char buf[160];
    std::snprintf(buf, sizeof buf, "iterations=%zu reason=%s objective=%.17g", result.trace.records.size(),
                  std::string(to_string(result.trace.reason)).c_str(), obj.total);
    out << buf << '\n';
    return 0;
}

int cmd_metrics(const Options& o, std::ostream& out) {
    require(o.images.size() == 2, "metrics needs exactly two images: <reconstruction> <reference>");
    const Image x = read_image(o.images[0]);
    const Image gt = read_image(o.images[1]);
    const auto r = evaluate(x, gt);
    const std::string csv = "re,psnr,ssim\n" + format_re(r.re) + ',' + format_psnr(r.psnr) + ',' + format_ssim(r.ssim) + '\n';
    out << csv;
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        write_text(fs::path(o.out) / "metrics.csv", csv);
    }
    return 0;
}

int cmd_theory(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load(o);
    const auto dir = prepare_out(cfg);
    const auto report = theory_report(cfg, o.verbose ? &err : nullptr);
    write_text(dir / "theory.json", report.dump(2) + "\n");
    out << "wrote " << (dir / "theory.json").string() << '\n';
    return 0;
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load(o);
    const auto dir = prepare_out(cfg);
    const auto result = run_experiment(cfg, o.verbose ? &err : nullptr);
    const std::string csv = experiment_csv(result);
    write_text(dir / "table.csv", csv);
    write_image(ground_truth(cfg), dir / "phantom.pgm");
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const std::string s = slug(result.rows[i].method);
        write_both(result.solutions[i], dir, "solution_" + s);
        write_image(result.weights[i], dir / ("weights_" + s + ".pgm"));
        if (result.x_tilde[i].size() > 0) write_image(result.x_tilde[i], dir / ("x_tilde_" + s + ".pgm"));
    }
    out << csv;
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weighted-TV sparse-view CT reconstruction", "svtv"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "configuration file (key = value)");
    app.add_option("--out", o.out, "output directory (overrides output.dir)");
    app.add_option("--seed", o.seed, "noise seed (overrides noise.seed)");
    app.add_flag("--verbose,-v", o.verbose, "progress on stderr");

    auto* phantom = app.add_subcommand("phantom", "rasterize the configured phantom");
    auto* sinogram = app.add_subcommand("sinogram", "simulate y_delta = K x + e");
    sinogram->add_option("--input", o.input, "phantom image instead of the configured one");
    auto* recon = app.add_subcommand("reconstruct", "coarse reconstruction x_tilde = Psi(y_delta)");
    recon->add_option("--sinogram", o.sinogram, "sinogram file (default <out>/sinogram.img)");
    auto* weights = app.add_subcommand("weights", "weight map from x_tilde");
    weights->add_option("--input", o.input, "x_tilde image (default <out>/x_tilde.img)");
    auto* solve = app.add_subcommand("solve", "weighted-TV Chambolle-Pock solve");
    solve->add_option("--sinogram", o.sinogram, "sinogram file (default <out>/sinogram.img)");
    solve->add_option("--weights", o.weights, "weight image (default: unit weights)");
    solve->add_option("--init", o.init, "initial image (default: zeros)");
    auto* metrics = app.add_subcommand("metrics", "RE, PSNR and SSIM of an image against a reference");
    metrics->add_option("images", o.images, "<reconstruction> <reference>")->expected(2);
    auto* theory = app.add_subcommand("theory", "run the verification checks, write theory.json");
    auto* experiment = app.add_subcommand("experiment", "compare GT/FBP/TV-weighted pipelines with global TV");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (phantom->parsed()) return cmd_phantom(o, out);
        if (sinogram->parsed()) return cmd_sinogram(o, out, err);
        if (recon->parsed()) return cmd_reconstruct(o, out);
        if (weights->parsed()) return cmd_weights(o, out);
        if (solve->parsed()) return cmd_solve(o, out, err);
        if (metrics->parsed()) return cmd_metrics(o, out);
        if (theory->parsed()) return cmd_theory(o, out, err);
        if (experiment->parsed()) return cmd_experiment(o, out, err);
    } catch (const SolverDivergence& e) {
        err << "error: " << e.what() << " (" << e.trace.records.size() << " iterations recorded)\n";
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace svtv::cli
