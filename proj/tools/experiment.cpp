#include <ostream>
#include <sstream>

#include "cli.hpp"

namespace svtv::cli {

ExperimentResult run_experiment(const RunConfig& cfg, std::ostream* log) {
    const Geometry geom = cfg.geometry();
    const SparseOperator K = load_or_build_projector(cfg);
    const Image gt = ground_truth(cfg);
    const GradientOperator D(cfg.image_side, cfg.image_side, cfg.boundary);
    const auto sim = simulate_sinogram(gt, K, geom.n_angles(), geom.n_detectors, cfg.noise);
    if (log && sim.zero_signal_warning) *log << "warning: zero sinogram, noise suppressed\n";

    SolverConfig solver = cfg.solver;
    if (solver.operator_norm <= 0.0) solver.operator_norm = stacked_operator_norm(K, D);
    if (log) *log << "||[K; D]||_2 = " << solver.operator_norm << ", delta = " << sim.delta << '\n';

    const ReconstructorContext ctx{&geom, &K, &gt, cfg.boundary, solver.operator_norm};
    ReconstructorSpec fbp_spec;
    fbp_spec.kind = ReconstructorKind::fbp;
    fbp_spec.cutoff = cfg.reconstructor.cutoff;
    ReconstructorSpec tv_spec;
    tv_spec.kind = ReconstructorKind::early_tv;
    tv_spec.lambda = cfg.reconstructor.lambda;
    tv_spec.iterations = cfg.reconstructor.iterations;

    struct Pipeline {
        const char* name;
        std::optional<Image> x_tilde;
    };
    std::vector<Pipeline> pipelines;
    pipelines.push_back({"GT-Wl1", gt});
    pipelines.push_back({"FBP-Wl1", reconstruct(fbp_spec, sim.noisy, ctx)});
    pipelines.push_back({"TV-Wl1", reconstruct(tv_spec, sim.noisy, ctx)});
    pipelines.push_back({"global TV", std::nullopt});

    ExperimentResult result;
    for (const auto& p : pipelines) {
        MethodRow row;
        row.method = p.name;
        std::vector<double> w;
        if (p.x_tilde) {
            w = compute_weights(*p.x_tilde, cfg.weights, cfg.boundary, p.name).w;
            row.tilde = evaluate(*p.x_tilde, gt);
        }
        const auto solved = cp_solve(K, D, sim.noisy.values, w, solver);
        Image x(cfg.image_side, cfg.image_side, solved.x);
        row.solution = evaluate(x, gt);
        if (log)
            *log << p.name << ": " << solved.trace.records.size() << " iterations ("
                 << to_string(solved.trace.reason) << "), RE " << format_re(row.solution.re) << '\n';
        result.rows.push_back(row);
        result.x_tilde.push_back(p.x_tilde ? *p.x_tilde : Image());
        result.weights.push_back(
            w.empty() ? Image(cfg.image_side, cfg.image_side, 1.0) : Image(cfg.image_side, cfg.image_side, w));
        result.solutions.push_back(std::move(x));
    }
    return result;
}

std::string experiment_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "method,re_tilde,psnr_tilde,ssim_tilde,re,psnr,ssim\n";
    for (const auto& r : result.rows) {
        out << r.method << ',';
        if (r.tilde)
            out << format_re(r.tilde->re) << ',' << format_psnr(r.tilde->psnr) << ',' << format_ssim(r.tilde->ssim);
        else
            out << "-,-,-";
        out << ',' << format_re(r.solution.re) << ',' << format_psnr(r.solution.psnr) << ','
            << format_ssim(r.solution.ssim) << '\n';
    }
    return out.str();
}

}  // namespace svtv::cli
