#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svtv/geometry.hpp"
#include "svtv/gradient.hpp"
#include "svtv/metrics.hpp"
#include "svtv/phantom.hpp"
#include "svtv/reconstructors.hpp"
#include "svtv/solver.hpp"
#include "svtv/weights.hpp"

namespace svtv::cli {

struct RunConfig {
    // geometry.*
    BeamMode mode = BeamMode::parallel;
    std::size_t n_angles = 45;
    double angle_range_deg = 180.0;
    std::size_t n_detectors = 0;  ///< 0: just enough cells to cover the image
    double detector_spacing = 1.0;
    double source_origin_dist = 0.0;
    double source_detector_dist = 0.0;
    std::size_t image_side = 64;
    std::filesystem::path projector_cache;
    // gradient.*
    Boundary boundary = Boundary::forward;
    // phantom.*
    std::string phantom_preset = "synthetic-ct";
    std::filesystem::path phantom_input;
    // noise.*
    NoiseSpec noise{0.005, 42};
    // reconstructor.*, weights.*, solver.*
    ReconstructorSpec reconstructor;
    WeightParams weights;
    SolverConfig solver = [] {
        SolverConfig s;
        s.max_iter = 5000;
        return s;
    }();
    // output.*
    std::filesystem::path output_dir = "out";

    Geometry geometry() const;
};

/// Strict key = value parser. `[section]` lines prefix the keys that follow, so
/// "[solver]\nlambda = 5" and "solver.lambda = 5" are the same. '#' starts a comment.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");

/// Every key accepted by the parser, dotted.
std::vector<std::string> config_keys();

/// K for the configured geometry, read from / written to geometry.projector_cache when set.
SparseOperator load_or_build_projector(const RunConfig& cfg);

Image ground_truth(const RunConfig& cfg);

struct MethodRow {
    std::string method;
    std::optional<MetricsReport> tilde;  ///< absent for global TV
    MetricsReport solution;
};

struct ExperimentResult {
    std::vector<MethodRow> rows;  ///< GT-Wl1, FBP-Wl1, TV-Wl1, global TV
    std::vector<Image> x_tilde;   ///< per row; empty image for global TV
    std::vector<Image> weights;   ///< per row; all ones for global TV
    std::vector<Image> solutions;
};

/// The comparison of weighted-TV pipelines against global TV on one simulated sinogram.
ExperimentResult run_experiment(const RunConfig& cfg, std::ostream* log = nullptr);

/// method,re_tilde,psnr_tilde,ssim_tilde,re,psnr,ssim
std::string experiment_csv(const ExperimentResult& result);

/// Entry point behind the `svtv` binary. Returns the process exit code.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace svtv::cli
