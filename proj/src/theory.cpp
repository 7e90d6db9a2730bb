#include "svtv/theory.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "svtv/rng.hpp"

namespace svtv {

namespace {

Eigen::MatrixXd dense(const SparseOperator& op) {
    const auto d = op.to_dense();
    Eigen::MatrixXd m(op.rows(), op.cols());
    for (std::size_t r = 0; r < op.rows(); ++r)
        for (std::size_t c = 0; c < op.cols(); ++c) m(r, c) = d[r * op.cols() + c];
    return m;
}

double unweighted_objective(std::span<const double> x, std::span<const double> y, const SparseOperator& K,
                            const GradientOperator& D, double lambda) {
    return objective(x, y, K, D, {}, lambda).total;
}

std::vector<double> solve_with_weights(const ExperimentProblem& pb, std::span<const double> y,
                                       std::span<const double> w, std::size_t* iterations) {
    const GradientOperator D(pb.gt.rows, pb.gt.cols, pb.boundary);
    auto result = cp_solve(pb.K, D, y, w, pb.solver);
    if (iterations) *iterations = result.trace.records.size();
    return std::move(result.x);
}

}  // namespace

double midpoint_gap(std::span<const double> x1, std::span<const double> x2, std::span<const double> y,
                    const SparseOperator& K, const GradientOperator& D, double lambda) {
    require(x1.size() == x2.size(), "midpoint_gap: length mismatch");
    std::vector<double> mid(x1.size());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (x1[i] + x2[i]);
    const double j1 = unweighted_objective(x1, y, K, D, lambda);
    const double j2 = unweighted_objective(x2, y, K, D, lambda);
    const double jm = unweighted_objective(mid, y, K, D, lambda);
    const double k_gap = norm2(difference(K.apply(x1), K.apply(x2)));
    return jm - (0.5 * (j1 + j2) - 0.125 * k_gap * k_gap);
}

MidpointReport check_midpoint_inequality(const SparseOperator& K, const GradientOperator& D,
                                         std::span<const double> y_delta, double lambda, std::size_t n_trials,
                                         std::uint64_t seed) {
    require(n_trials >= 1, "midpoint check: n_trials must be >= 1");
    Rng rng(seed);
    MidpointReport rep;
    rep.n_trials = n_trials;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    std::vector<double> x1(K.cols()), x2(K.cols());
    for (std::size_t t = 0; t < n_trials; ++t) {
        for (auto& v : x1) v = rng.uniform();
        for (auto& v : x2) v = rng.uniform();
        const double gap = midpoint_gap(x1, x2, y_delta, K, D, lambda);
        const double scale = 1.0 + std::max(std::abs(unweighted_objective(x1, y_delta, K, D, lambda)),
                                            std::abs(unweighted_objective(x2, y_delta, K, D, lambda)));
        rep.max_violation = std::max(rep.max_violation, gap);
        rep.max_scale = std::max(rep.max_scale, scale);
        if (gap > 1e-10 * scale) ++rep.violations;
    }
    return rep;
}

double dhat_identity_error(const Image& x, Boundary boundary) {
    const auto g = gradient(x, boundary);
    const auto gh = dhat(g);
    const double tv = norm21(g);
    return std::abs(tv - dot(gh.data, g.data)) / (1.0 + tv);
}

double check_dhat_identity(std::span<const Image> images, Boundary boundary) {
    require(!images.empty(), "dhat identity check: empty image set");
    double worst = 0.0;
    for (const auto& img : images) worst = std::max(worst, dhat_identity_error(img, boundary));
    return worst;
}

UniquenessReport check_uniqueness_conditions(const SparseOperator& K, const GradientOperator& D,
                                             std::span<const double> x1, const UniquenessTolerances& tol) {
    const std::size_t n = K.cols();
    require(D.pixels() == n && x1.size() == n, "uniqueness check: sizes do not match");
    require(n <= 400, "uniqueness check: instance too large for dense linear algebra (n > 400)");
    UniquenessReport rep;

    // (i) D^T Dhat x1 in range(K^T).
    const auto g = D.apply(x1);
    const auto gh = dhat(g);
    std::vector<double> b(n);
    D.adjoint(gh.data, b);
    const Eigen::MatrixXd Kd = dense(K);
    const Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd Kt = Kd.transpose();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Kt);
    const Eigen::VectorXd z = cod.solve(bv);
    const double bn = bv.norm();
    rep.cond1_residual = bn > 0.0 ? (Kt * z - bv).norm() / bn : 0.0;
    rep.cond1_holds = rep.cond1_residual <= tol.residual;

    // (ii) ker K intersected with S1.
    const auto mag = gradient_magnitude(g);
    std::vector<std::size_t> zero_set;
    for (std::size_t i = 0; i < n; ++i)
        if (mag[i] <= tol.zero_gradient) zero_set.push_back(i);
    rep.zero_set_size = zero_set.size();

    Eigen::MatrixXd basis;
    if (zero_set.empty()) {
        basis = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    } else {
        const Eigen::MatrixXd Dd = dense(D.to_sparse());
        Eigen::MatrixXd A(static_cast<Eigen::Index>(2 * zero_set.size()), static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < zero_set.size(); ++k) {
            A.row(static_cast<Eigen::Index>(2 * k)) = Dd.row(static_cast<Eigen::Index>(zero_set[k]));
            A.row(static_cast<Eigen::Index>(2 * k + 1)) = Dd.row(static_cast<Eigen::Index>(n + zero_set[k]));
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double smax = sv.size() > 0 ? sv(0) : 0.0;
        const double thresh = static_cast<double>(std::max(A.rows(), A.cols())) *
                              std::numeric_limits<double>::epsilon() * std::max(smax, 1.0);
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > thresh) ++rank;
        basis = svd.matrixV().rightCols(static_cast<Eigen::Index>(n) - rank);
    }
    rep.s1_dimension = static_cast<std::size_t>(basis.cols());
    if (basis.cols() == 0) {
        rep.cond2_min_sv = std::numeric_limits<double>::infinity();
    } else if (basis.cols() > Kd.rows()) {
        rep.cond2_min_sv = 0.0;
    } else {
        const Eigen::MatrixXd KB = Kd * basis;
        Eigen::BDCSVD<Eigen::MatrixXd> svd(KB);
        rep.cond2_min_sv = svd.singularValues().minCoeff();
    }
    rep.cond2_holds = rep.cond2_min_sv > tol.singular;
    return rep;
}

InducedNormBracket d_norm_21_from_l1(const GradientOperator& D, std::size_t n_random, std::uint64_t seed) {
    const std::size_t n = D.pixels();
    InducedNormBracket out;
    std::vector<double> x(n, 0.0), g(2 * n);
    auto ratio = [&]() {
        D.apply(x, g);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::hypot(g[i], g[n + i]);
        return s / norm1(x);
    };
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = 1.0;
        out.lower = std::max(out.lower, ratio());
        x[j] = 0.0;
    }
    Rng rng(seed);
    for (std::size_t t = 0; t < n_random; ++t) {
        for (auto& v : x) v = rng.normal();
        out.lower = std::max(out.lower, ratio());
    }
    // ||x||_{2,1} <= ||x||_1, so the l1 -> l1 norm (max column sum) bounds from above.
    const auto Ds = D.to_sparse();
    std::vector<double> col(n, 0.0);
    for (std::size_t k = 0; k < Ds.nnz(); ++k) col[Ds.col_indices()[k]] += std::abs(Ds.values()[k]);
    for (double c : col) out.upper = std::max(out.upper, c);
    return out;
}

ObjectiveBoundReport check_objective_bound(const ObjectiveBoundInput& in, std::span<const Image> trial_images) {
    require(in.K && in.D && in.x_gt, "objective bound: K, D and x_gt are required");
    const SparseOperator& K = *in.K;
    const GradientOperator& D = *in.D;
    const Image& gt = *in.x_gt;
    require(in.noise.size() == K.rows(), "objective bound: noise length does not match K");
    in.params.validate();

    auto y = K.apply(gt.pixels);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += in.noise[i];
    const std::size_t nd = in.ctx.geom ? in.ctx.geom->n_detectors : K.rows();
    ReconstructorContext ctx = in.ctx;
    ctx.K = &K;
    ctx.ground_truth = &gt;
    ctx.boundary = D.boundary();
    const Image x_tilde = reconstruct(in.psi, Sinogram(K.rows() / nd, nd, y), ctx);

    const auto w_gt = compute_weights(gt, in.params, D.boundary()).w;
    const auto w_psi = compute_weights(x_tilde, in.params, D.boundary()).w;

    ObjectiveBoundReport rep;
    std::vector<Image> samples = in.accuracy_samples;
    samples.push_back(gt);
    rep.noise_l1 = norm1(in.noise);
    if (rep.noise_l1 > 0.0) {
        const auto q = estimate_stability(in.psi, samples, K, 1.0, rep.noise_l1, in.n_noise, in.seed, ctx);
        rep.eta_1 = q.eta_p;
        // The realized noise is one more draw of the sup.
        const double actual = (norm1(difference(x_tilde.pixels, gt.pixels)) - q.eta_p) / rep.noise_l1;
        rep.c_eps = std::max({q.c_eps, actual, 0.0});
    } else {
        rep.eta_1 = estimate_accuracy(in.psi, samples, K, 1.0, ctx);
    }

    double grid_max = 10.0 * in.params.eta;
    for (double v : gradient_magnitude(gradient(gt, D.boundary()))) grid_max = std::max(grid_max, v);
    for (double v : gradient_magnitude(gradient(x_tilde, D.boundary()))) grid_max = std::max(grid_max, v);
    rep.lipschitz = weight_lipschitz_constant(in.params, grid_max);
    const auto bracket = d_norm_21_from_l1(D);
    rep.d_norm = bracket.upper;
    rep.d_norm_lower = bracket.lower;

    for (const auto& x : trial_images) {
        const double j_gt = objective(x.pixels, y, K, D, w_gt, in.lambda).total;
        const double j_psi = objective(x.pixels, y, K, D, w_psi, in.lambda).total;
        ObjectiveBoundTrial t;
        t.lhs = std::abs(j_gt - j_psi);
        t.rhs = in.lambda * rep.lipschitz * rep.d_norm * (rep.eta_1 + rep.c_eps * rep.noise_l1) *
                norm21(gradient(x, D.boundary()));
        t.slack = t.rhs - t.lhs;
        // The left side comes from a difference of two objectives; allow for that rounding.
        if (t.lhs > t.rhs + 1e-12 * (1.0 + std::abs(j_gt))) ++rep.violations;
        rep.trials.push_back(t);
    }
    return rep;
}

RegularizerAgreement check_regularizer_agreement(const SparseOperator& K, const GradientOperator& D,
                                                 std::span<const double> y_delta, std::span<const double> w,
                                                 const SolverConfig& cfg, std::span<const double> x0_a,
                                                 std::span<const double> x0_b) {
    RegularizerAgreement out;
    const auto a = cp_solve(K, D, y_delta, w, cfg, x0_a);
    const auto b = cp_solve(K, D, y_delta, w, cfg, x0_b);
    out.reg_a = objective(a.x, y_delta, K, D, w, cfg.lambda).reg;
    out.reg_b = objective(b.x, y_delta, K, D, w, cfg.lambda).reg;
    // The literal gap when the duals are feasible, else the box-bounded one.
    auto gap = [&](const SolverState& st) {
        const double g = primal_dual_gap(st, K, D, y_delta, w, cfg.lambda, cfg.gap_variant, cfg.f1_prox_variant);
        if (std::isfinite(g)) return std::abs(g);
        return std::abs(bounded_primal_dual_gap(st, K, D, y_delta, w, cfg.lambda, cfg.gap_box_bound, cfg.gap_variant,
                                                cfg.f1_prox_variant));
    };
    out.gap_a = gap(a.state);
    out.gap_b = gap(b.state);
    const double rounding = 1e-12 * (1.0 + std::max(std::abs(out.reg_a), std::abs(out.reg_b)));
    out.holds = std::abs(out.reg_a - out.reg_b) <= 10.0 * std::max(out.gap_a, out.gap_b) + rounding;
    return out;
}

ExperimentProblem make_experiment_problem(std::string_view preset, std::size_t side, std::size_t n_angles,
                                          const WeightParams& weights, const SolverConfig& solver,
                                          std::uint64_t noise_seed, Boundary boundary) {
    ExperimentProblem pb;
    pb.boundary = boundary;
    pb.gt = make_phantom(preset_phantom(preset, side));
    pb.geom = Geometry::parallel(side, n_angles, Geometry::covering_detectors(side));
    pb.K = build_projector(pb.geom);
    pb.weights = weights;
    pb.solver = solver;
    pb.noise_seed = noise_seed;
    if (pb.solver.operator_norm <= 0.0)
        pb.solver.operator_norm = stacked_operator_norm(pb.K, GradientOperator(side, side, pb.boundary));
    return pb;
}

std::vector<ConvergenceRecord> noise_convergence_experiment(std::span<const double> nus,
                                                            const ExperimentProblem& problem) {
    const auto clean = problem.K.apply(problem.gt.pixels);
    const auto w = compute_weights(problem.gt, problem.weights, problem.boundary, "gt").w;
    std::size_t ref_iters = 0;
    const auto reference = solve_with_weights(problem, clean, w, &ref_iters);
    std::vector<ConvergenceRecord> out;
    for (double nu : nus) {
        require(nu >= 0.0, "noise experiment: levels must be >= 0");
        ConvergenceRecord rec;
        rec.parameter = nu;
        if (nu == 0.0) {
            rec.iterations = ref_iters;
            out.push_back(rec);
            continue;
        }
        const auto e = sample_noise(clean, {nu, problem.noise_seed});
        std::vector<double> y(clean.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = clean[i] + e[i];
        const auto x = solve_with_weights(problem, y, w, &rec.iterations);
        rec.distance = norm1(difference(x, reference));
        out.push_back(rec);
    }
    return out;
}

Image blend_reconstruction(const Image& gt, const Image& fbp_image, double k) {
    require(k >= 1.0, "blend: k must be >= 1");
    require(gt.rows == fbp_image.rows && gt.cols == fbp_image.cols, "blend: image shapes differ");
    Image out(gt.rows, gt.cols);
    const double a = 1.0 - 1.0 / k;
    const double b = 1.0 / k;
    for (std::size_t i = 0; i < out.size(); ++i) out.pixels[i] = a * gt.pixels[i] + b * fbp_image.pixels[i];
    return out;
}

double gradient_magnitude_distance(const Image& a, const Image& b, Boundary boundary) {
    return norm1(difference(gradient_magnitude(gradient(a, boundary)), gradient_magnitude(gradient(b, boundary))));
}

std::vector<ConvergenceRecord> reconstructor_convergence_experiment(std::span<const double> ks, double nu,
                                                                    const ExperimentProblem& problem) {
    const auto clean = problem.K.apply(problem.gt.pixels);
    const auto e = sample_noise(clean, {nu, problem.noise_seed});
    std::vector<double> y(clean.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = clean[i] + e[i];
    const Image x_fbp = fbp(Sinogram(problem.geom.n_angles(), problem.geom.n_detectors, y), problem.geom,
                            problem.fbp_cutoff, &problem.K);
    const auto w_gt = compute_weights(problem.gt, problem.weights, problem.boundary, "gt").w;
    const auto x_gt_star = solve_with_weights(problem, y, w_gt, nullptr);

    std::vector<ConvergenceRecord> out;
    for (double k : ks) {
        ConvergenceRecord rec;
        rec.parameter = k;
        const Image x_tilde = blend_reconstruction(problem.gt, x_fbp, k);
        rec.hypothesis = gradient_magnitude_distance(x_tilde, problem.gt, problem.boundary);
        const auto w = compute_weights(x_tilde, problem.weights, problem.boundary).w;
        const auto x = solve_with_weights(problem, y, w, &rec.iterations);
        rec.distance = norm1(difference(x, x_gt_star));
        out.push_back(rec);
    }
    return out;
}

bool nonincreasing_within(std::span<const double> values, double slack) {
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > (1.0 + slack) * values[i - 1]) return false;
    return true;
}

}  // namespace svtv
