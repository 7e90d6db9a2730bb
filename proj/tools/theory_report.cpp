#include "theory_report.hpp"

#include <cmath>
#include <ostream>

#include "svtv/rng.hpp"
#include "svtv/theory.hpp"

namespace svtv::cli {

namespace {

using nlohmann::json;

// JSON has no infinity; report it as a string.
json number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return v;
}

json records_json(const std::vector<ConvergenceRecord>& recs, const char* parameter, bool with_hypothesis) {
    json arr = json::array();
    for (const auto& r : recs) {
        json j{{parameter, r.parameter}, {"distance_l1", r.distance}, {"iterations", r.iterations}};
        if (with_hypothesis) j["hypothesis_l1"] = r.hypothesis;
        arr.push_back(j);
    }
    return arr;
}

}  // namespace

nlohmann::json theory_report(const RunConfig& cfg, std::ostream* log) {
    json report;
    const double lambda = cfg.solver.lambda;
    Rng rng(cfg.noise.seed);
    auto say = [&](const char* what) {
        if (log) *log << "theory: " << what << '\n';
    };

    {
        say("midpoint inequality");
        const auto geom = Geometry::parallel(8, cfg.n_angles, Geometry::covering_detectors(8));
        const auto K = build_projector(geom);
        const GradientOperator D(8, 8, cfg.boundary);
        std::vector<double> x(64);
        for (auto& v : x) v = rng.uniform();
        auto y = K.apply(x);
        for (auto& v : y) v += 0.01 * rng.normal();
        const auto rep = check_midpoint_inequality(K, D, y, lambda, 1000, cfg.noise.seed);
        report["midpoint_inequality"] = {{"trials", rep.n_trials},
                                         {"max_violation", rep.max_violation},
                                         {"max_scale", rep.max_scale},
                                         {"violations", rep.violations},
                                         {"holds", rep.violations == 0}};
    }
    {
        say("normalized gradient identity");
        std::vector<Image> images;
        for (int t = 0; t < 1000; ++t) {
            Image img(16, 16);
            for (auto& v : img.pixels) v = rng.uniform();
            images.push_back(std::move(img));
        }
        images.emplace_back(16, 16, 0.5);
        const double err = check_dhat_identity(images, cfg.boundary);
        report["dhat_identity"] = {{"images", images.size()}, {"max_relative_error", err}, {"holds", err <= 1e-12}};
    }
    {
        say("weight range and Lipschitz constant");
        double w_min = 1.0;
        double w_max = 0.0;
        bool boundary_exact = weight_value(0.0, cfg.weights) == 1.0;
        for (int t = 0; t < 100000; ++t) {
            const double a = cfg.weights.eta * std::pow(10.0, rng.uniform(-3.0, 6.0));
            const double w = weight_value(a, cfg.weights);
            w_min = std::min(w_min, w);
            w_max = std::max(w_max, w);
            boundary_exact = boundary_exact && w < 1.0;
        }
        const double grid_max = 1e6 * cfg.weights.eta;
        const double L = weight_lipschitz_constant(cfg.weights, grid_max);
        double worst = 0.0;
        for (int t = 0; t < 10000; ++t) {
            const double a = rng.uniform(0.0, 20.0 * cfg.weights.eta);
            const double b = rng.uniform(0.0, 20.0 * cfg.weights.eta);
            if (a == b) continue;
            worst = std::max(worst, std::abs(weight_value(a, cfg.weights) - weight_value(b, cfg.weights)) / std::abs(a - b));
        }
        report["weights"] = {{"samples", 100000},
                             {"min", w_min},
                             {"max", w_max},
                             {"range_holds", w_min > 0.0 && w_max <= 1.0},
                             {"boundary_exact", boundary_exact},
                             {"lipschitz_constant", L},
                             {"max_pair_ratio", worst},
                             {"lipschitz_holds", worst <= L}};
    }
    {
        say("uniqueness conditions");
        const std::size_t side = 16;
        const auto geom = Geometry::parallel(side, cfg.n_angles, Geometry::covering_detectors(side));
        const auto K = build_projector(geom);
        const GradientOperator D(side, side, cfg.boundary);
        const Image gt = make_phantom(preset_phantom("synthetic-ct", side));
        const auto sim = simulate_sinogram(gt, K, geom.n_angles(), geom.n_detectors, cfg.noise);
        SolverConfig sc = cfg.solver;
        sc.operator_norm = 0.0;
        const auto solved = cp_solve(K, D, sim.noisy.values, {}, sc);
        const auto rep = check_uniqueness_conditions(K, D, solved.x);
        report["uniqueness"] = {{"image_side", side},
                                {"n_angles", cfg.n_angles},
                                {"cond1_residual", rep.cond1_residual},
                                {"cond1_holds", rep.cond1_holds},
                                {"cond2_min_sv", number(rep.cond2_min_sv)},
                                {"cond2_holds", rep.cond2_holds},
                                {"zero_set_size", rep.zero_set_size},
                                {"s1_dimension", rep.s1_dimension},
                                {"note", "hypothesis status is instance-dependent and reported, not asserted"}};
    }
    {
        say("objective bound");
        const std::size_t side = 16;
        const auto geom = Geometry::parallel(side, cfg.n_angles, Geometry::covering_detectors(side));
        const auto K = build_projector(geom);
        const GradientOperator D(side, side, cfg.boundary);
        const Image gt = make_phantom(preset_phantom("synthetic-ct", side));
        const auto e = sample_noise(K.apply(gt.pixels), cfg.noise);
        ObjectiveBoundInput in;
        in.K = &K;
        in.D = &D;
        in.x_gt = &gt;
        in.noise = e;
        in.psi.kind = ReconstructorKind::fbp;
        in.ctx.geom = &geom;
        in.params = cfg.weights;
        in.lambda = lambda;
        in.accuracy_samples.push_back(make_phantom(preset_phantom("disk", side)));
        std::vector<Image> trials;
        for (int t = 0; t < 10; ++t) {
            Image img(side, side);
            for (auto& v : img.pixels) v = rng.uniform();
            trials.push_back(std::move(img));
        }
        const auto rep = check_objective_bound(in, trials);
        double min_slack = std::numeric_limits<double>::infinity();
        for (const auto& t : rep.trials) min_slack = std::min(min_slack, t.slack);
        report["objective_bound"] = {{"reconstructor", "fbp"},
                                     {"lipschitz", rep.lipschitz},
                                     {"d_norm_upper", rep.d_norm},
                                     {"d_norm_lower", rep.d_norm_lower},
                                     {"eta_1", rep.eta_1},
                                     {"c_eps", rep.c_eps},
                                     {"noise_l1", rep.noise_l1},
                                     {"trials", rep.trials.size()},
                                     {"min_slack", number(min_slack)},
                                     {"violations", rep.violations}};
    }
    {
        say("regularizer agreement");
        const std::size_t side = 16;
        const auto geom = Geometry::parallel(side, cfg.n_angles, Geometry::covering_detectors(side));
        const auto K = build_projector(geom);
        const GradientOperator D(side, side, cfg.boundary);
        const Image gt = make_phantom(preset_phantom("synthetic-ct", side));
        const auto sim = simulate_sinogram(gt, K, geom.n_angles(), geom.n_detectors, cfg.noise);
        const auto w = compute_weights(gt, cfg.weights, cfg.boundary).w;
        SolverConfig sc = cfg.solver;
        sc.operator_norm = 0.0;
        sc.diagnostics_every = sc.max_iter;
        std::vector<double> start(side * side);
        for (auto& v : start) v = rng.uniform();
        const auto rep = check_regularizer_agreement(K, D, sim.noisy.values, w, sc, {}, start);
        report["regularizer_agreement"] = {{"reg_zero_start", rep.reg_a},
                                           {"reg_random_start", rep.reg_b},
                                           {"gap_zero_start", rep.gap_a},
                                           {"gap_random_start", rep.gap_b},
                                           {"holds", rep.holds}};
    }
    {
        say("noise convergence experiment");
        const auto pb = make_experiment_problem("synthetic-ct", 32, cfg.n_angles, cfg.weights, cfg.solver,
                                                cfg.noise.seed, cfg.boundary);
        const std::vector<double> nus{0.02, 0.01, 0.005, 0.0025};
        const auto recs = noise_convergence_experiment(nus, pb);
        std::vector<double> d;
        for (const auto& r : recs) d.push_back(r.distance);
        report["noise_convergence"] = {{"records", records_json(recs, "nu", false)},
                                       {"nonincreasing_5pct", nonincreasing_within(d, 0.05)}};

        say("reconstructor convergence experiment");
        const std::vector<double> ks{1, 2, 4, 8, 16};
        const auto brecs = reconstructor_convergence_experiment(ks, cfg.noise.nu, pb);
        std::vector<double> h, c;
        for (const auto& r : brecs) {
            h.push_back(r.hypothesis);
            c.push_back(r.distance);
        }
        report["reconstructor_convergence"] = {
            {"nu", cfg.noise.nu},
            {"records", records_json(brecs, "k", true)},
            {"hypothesis_nonincreasing_5pct", nonincreasing_within(h, 0.05)},
            {"conclusion_nonincreasing_5pct", nonincreasing_within(c, 0.05)},
            {"last_below_quarter_of_first", c.back() < 0.25 * c.front()}};
    }
    return report;
}

}  // namespace svtv::cli
