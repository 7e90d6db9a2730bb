#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "svtv/image_io.hpp"
#include "util.hpp"

using namespace svtv;
using svtv::cli::parse_config_text;
using svtv::cli::run_command;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string small_config(const std::filesystem::path& out, std::size_t iters) {
    return "[geometry]\nimage_side = 16\nn_angles = 20\n[solver]\nmax_iter = " + std::to_string(iters) +
           "\n[reconstructor]\nkind = early_tv\niterations = 10\n[output]\ndir = " + out.string() + "\n";
}

}  // namespace

TEST_CASE("config: empty file gives documented defaults") {
    const auto cfg = parse_config_text("# nothing\n\n");
    CHECK(cfg.n_angles == 45);
    CHECK(cfg.image_side == 64);
    CHECK(cfg.solver.beta == 1.0);
    CHECK(cfg.solver.sigma == 0.0);  // 0 selects 1 / ||M||
    CHECK(cfg.solver.tau == 0.0);
    CHECK(cfg.solver.lambda == 5.0);
    CHECK(cfg.weights.eta == 2e-5);
    CHECK(cfg.noise.nu == 0.005);
    CHECK(cfg.boundary == Boundary::forward);
    CHECK(cfg.geometry().n_detectors == Geometry::covering_detectors(64));
}

TEST_CASE("config: the shipped table file is the low-noise setting") {
    const auto cfg = cli::parse_config(std::filesystem::path(SVTV_SOURCE_DIR) / "configs" / "table1.cfg");
    CHECK(cfg.solver.lambda == 5.0);
    CHECK(cfg.weights.eta == 2e-5);
    CHECK(cfg.noise.nu == 0.005);
    CHECK(cfg.n_angles == 45);
    CHECK(cfg.angle_range_deg == 180.0);
    CHECK(cfg.reconstructor.kind == ReconstructorKind::early_tv);
    CHECK(cfg.reconstructor.iterations == 100);
}

TEST_CASE("config: sections and dotted keys are equivalent") {
    const auto a = parse_config_text("[solver]\nlambda = 2.5\n[weights]\neta=1e-3  # inline\n");
    const auto b = parse_config_text("solver.lambda = 2.5\nweights.eta = 1e-3\n");
    CHECK(a.solver.lambda == b.solver.lambda);
    CHECK(a.weights.eta == b.weights.eta);
    const auto c = parse_config_text(
        "geometry.mode = fan\ngeometry.source_origin_dist = 100\ngeometry.source_detector_dist = 200\n"
        "solver.f1_prox_variant = paper\ngradient.boundary = central\n");
    CHECK(c.mode == BeamMode::fan);
    CHECK(c.solver.f1_prox_variant == F1ProxVariant::paper);
    CHECK(c.boundary == Boundary::central);
    // the fan default detector count covers the magnified grid
    CHECK(c.geometry().n_detectors > Geometry::covering_detectors(64));
    for (const auto& k : cli::config_keys()) CHECK(k.find('.') != std::string::npos);
}

TEST_CASE("config: errors name the key and the line") {
    auto message = [](const std::string& text) {
        try {
            parse_config_text(text, "t.cfg");
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("weights.eta = -1\n").find("eta") != std::string::npos);
    CHECK(message("weights.eta = -1\n").find("t.cfg:1") != std::string::npos);
    CHECK(message("\nsolver.lamda = 1\n").find("t.cfg:2: unknown key 'solver.lamda'") != std::string::npos);
    CHECK(message("solver.max_iter = many\n").find("solver.max_iter") != std::string::npos);
    CHECK(message("solver.max_iter = -3\n").find("solver.max_iter") != std::string::npos);
    CHECK(message("noise.nu = -0.1\n").find("noise.nu") != std::string::npos);
    CHECK(message("solver.beta = 2\n").find("solver.beta") != std::string::npos);
    CHECK(message("weights.p = 1\n").find("weights.p") != std::string::npos);
    CHECK(message("solver.lambda = 1\nsolver.lambda = 2\n").find("already set on line 1") != std::string::npos);
    CHECK(message("solver.lambda =\n").find("empty value") != std::string::npos);
    CHECK(message("just words\n").find("key = value") != std::string::npos);
    CHECK(message("[solver\n").find("section") != std::string::npos);
    CHECK(message("geometry.mode = fan\n").find("source") != std::string::npos);
    CHECK(message("reconstructor.kind = file\n").find("reconstructor.path") != std::string::npos);
    CHECK(message("reconstructor.kind = file\nreconstructor.path = /no/such.img\n").find("does not exist") !=
          std::string::npos);
    CHECK(message("phantom.input = /no/such.img\n").find("phantom.input") != std::string::npos);
    CHECK(message("geometry.image_side = 8\n").find("image_side") != std::string::npos);
    CHECK(message("reconstructor.kind = unet\n").find("reconstructor.kind") != std::string::npos);
    CHECK(message("geometry.n_angles = 0\n").find("angle") != std::string::npos);
    CHECK_THROWS_AS(cli::parse_config("/no/such/config.cfg"), Error);
}

TEST_CASE("metrics on identical images") {
    testutil::TempDir dir("metrics");
    write_image(testutil::random_image(16, 16, 1), dir / "a.img");
    const auto r = run({"metrics", (dir / "a.img").string(), (dir / "a.img").string(), "--out",
                        (dir / "m").string()});
    CHECK(r.code == 0);
    CHECK(r.out == "re,psnr,ssim\n0.0000,100.00,1.0000\n");
    CHECK(slurp(dir / "m" / "metrics.csv") == r.out);
    CHECK(run({"metrics", (dir / "a.img").string()}).code != 0);
}

TEST_CASE("solve with lambda 0 and an identity projector returns the sinogram") {
    testutil::TempDir dir("ident");
    save_csr(SparseOperator::identity(16), dir / "eye.csr");
    Rng rng(3);
    const Sinogram y(1, 16, testutil::random_vector(16, rng, 0, 1));
    write_sinogram(y, dir / "y.img");
    write_text(dir / "c.cfg", "geometry.image_side = 4\ngeometry.n_angles = 1\ngeometry.n_detectors = 16\n"
                              "geometry.projector_cache = " + (dir / "eye.csr").string() +
                                  "\nphantom.preset = disk\nsolver.lambda = 0\nsolver.max_iter = 3000\n");
    const auto r = run({"--config", (dir / "c.cfg").string(), "--out", dir.path.string(), "solve", "--sinogram",
                        (dir / "y.img").string()});
    REQUIRE(r.code == 0);
    const auto x = read_image(dir / "solution.img", 4);
    CHECK(norm_inf(difference(x.pixels, y.values)) <= 1e-6);
    CHECK(std::filesystem::exists(dir / "trace.csv"));
    CHECK(r.out.find("iterations=3000") != std::string::npos);
}

TEST_CASE("pipeline stages hand off through files") {
    testutil::TempDir dir("pipe");
    write_text(dir / "c.cfg", small_config(dir.path, 50) + "[geometry]\nprojector_cache = " +
                                  (dir / "k.csr").string() + "\n");
    const std::string cfg = (dir / "c.cfg").string();
    CHECK(run({"--config", cfg, "phantom"}).code == 0);
    CHECK(std::filesystem::exists(dir / "phantom.img"));
    CHECK(std::filesystem::exists(dir / "phantom.pgm"));

    const auto s = run({"--config", cfg, "--seed", "7", "sinogram"});
    CHECK(s.code == 0);
    CHECK(s.out.find("nu=0.005") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "k.csr"));
    const auto sino = read_sinogram(dir / "sinogram.img");
    CHECK(sino.n_angles == 20);

    CHECK(run({"--config", cfg, "reconstruct"}).code == 0);
    CHECK(run({"--config", cfg, "weights"}).code == 0);
    const auto w = read_image(dir / "weights.img", 16);
    for (double v : w.pixels) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
    const auto solved = run({"--config", cfg, "solve", "--weights", (dir / "weights.img").string(), "--init",
                             (dir / "x_tilde.img").string()});
    CHECK(solved.code == 0);
    CHECK(solved.out.find("reason=max_iter") != std::string::npos);

    // a different seed changes the noise, the same seed reproduces it
    const auto first = slurp(dir / "sinogram.img");
    run({"--config", cfg, "--seed", "7", "sinogram"});
    CHECK(slurp(dir / "sinogram.img") == first);
    run({"--config", cfg, "--seed", "8", "sinogram"});
    CHECK(slurp(dir / "sinogram.img") != first);
}

TEST_CASE("errors map to exit codes with context") {
    testutil::TempDir dir("errs");
    write_text(dir / "bad.cfg", "solver.lambda = -2\n");
    const auto bad = run({"--config", (dir / "bad.cfg").string(), "phantom"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("bad.cfg:1") != std::string::npos);
    CHECK(run({"frobnicate"}).code != 0);
    CHECK(run({}).code != 0);
    write_text(dir / "ok.cfg", small_config(dir.path, 5));
    const auto missing = run({"--config", (dir / "ok.cfg").string(), "solve"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("sinogram.img") != std::string::npos);
    // a sinogram from another geometry is rejected
    write_sinogram(Sinogram(3, 3, std::vector<double>(9, 0.0)), dir / "small.img");
    const auto mism = run({"--config", (dir / "ok.cfg").string(), "solve", "--sinogram", (dir / "small.img").string()});
    CHECK(mism.code == 2);
    CHECK(mism.err.find("geometry expects") != std::string::npos);
}

TEST_CASE("experiment writes the four table rows and reruns byte for byte") {
    testutil::TempDir dir("exp");
    write_text(dir / "c.cfg", small_config(dir / "a", 60));
    const auto a = run({"--config", (dir / "c.cfg").string(), "experiment"});
    REQUIRE(a.code == 0);
    std::istringstream csv(slurp(dir / "a" / "table.csv"));
    std::vector<std::string> lines;
    for (std::string l; std::getline(csv, l);) lines.push_back(l);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "method,re_tilde,psnr_tilde,ssim_tilde,re,psnr,ssim");
    CHECK(lines[1].rfind("GT-Wl1,0.0000,100.00,1.0000,", 0) == 0);
    CHECK(lines[2].rfind("FBP-Wl1,", 0) == 0);
    CHECK(lines[3].rfind("TV-Wl1,", 0) == 0);
    CHECK(lines[4].rfind("global TV,-,-,-,", 0) == 0);
    for (const char* f : {"phantom.pgm", "solution_gt_wl1.img", "solution_global_tv.pgm", "weights_fbp_wl1.pgm",
                          "x_tilde_tv_wl1.pgm"})
        CHECK(std::filesystem::exists(dir / "a" / f));

    const auto b = run({"--config", (dir / "c.cfg").string(), "--out", (dir / "b").string(), "experiment"});
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    for (const auto& entry : std::filesystem::directory_iterator(dir / "a"))
        CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));
}

TEST_CASE("theory writes a json report") {
    testutil::TempDir dir("theory");
    write_text(dir / "c.cfg", small_config(dir.path, 60));
    const auto r = run({"--config", (dir / "c.cfg").string(), "theory"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "theory.json"));
    CHECK(j["midpoint_inequality"]["holds"] == true);
    CHECK(j["dhat_identity"]["holds"] == true);
    CHECK(j["weights"]["range_holds"] == true);
    CHECK(j["weights"]["boundary_exact"] == true);
    CHECK(j["weights"]["lipschitz_holds"] == true);
    CHECK(j["objective_bound"]["violations"] == 0);
    CHECK(j.contains("uniqueness"));
    CHECK(j["noise_convergence"]["records"].size() == 4);
    CHECK(j["reconstructor_convergence"]["records"].size() == 5);
    CHECK(j.contains("regularizer_agreement"));
}
