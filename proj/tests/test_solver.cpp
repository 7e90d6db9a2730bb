#include <doctest.h>

#include <cmath>
#include <fstream>

#include "oracles.hpp"
#include "svtv/geometry.hpp"
#include "svtv/phantom.hpp"
#include "svtv/solver.hpp"
#include "svtv/weights.hpp"
#include "util.hpp"

using namespace svtv;

namespace {

struct Preset {
    std::size_t side;
    Geometry geom;
    SparseOperator K;
    GradientOperator D;
    Image gt;
    Sinogram y;
    std::vector<double> w;
};

Preset preset(std::size_t side) {
    auto geom = Geometry::parallel(side, 45, Geometry::covering_detectors(side));
    auto K = build_projector(geom);
    auto gt = make_phantom(preset_phantom("synthetic-ct", side));
    auto sim = simulate_sinogram(gt, K, 45, geom.n_detectors, {0.005, 42});
    auto w = compute_weights(gt, {}).w;
    return {side, geom, std::move(K), GradientOperator(side, side), std::move(gt), std::move(sim.noisy), std::move(w)};
}

SolverState zero_state(std::size_t n, std::size_t m) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(m, 0.0),
            std::vector<double>(2 * n, 0.0), 0};
}

}  // namespace

TEST_CASE("objective: zero case, TV collapse, dense recomputation") {
    const auto K = build_projector(Geometry::parallel(6, 8, 9));
    const GradientOperator D(6, 6);
    const std::vector<double> zeros_y(K.rows(), 0.0);
    const auto z = objective(std::vector<double>(36, 0.0), zeros_y, K, D, {}, 5.0);
    CHECK(z.total == 0.0);
    CHECK(z.fit == 0.0);
    CHECK(z.reg == 0.0);

    Rng rng(1);
    const auto x = testutil::random_vector(36, rng, 0, 1);
    const auto y = testutil::random_vector(K.rows(), rng, 0, 3);
    const auto unit = objective(x, y, K, D, {}, 0.7);
    CHECK(unit.reg == doctest::Approx(0.7 * norm21(D.apply(x))).epsilon(1e-14));
    CHECK(objective(x, y, K, D, std::vector<double>(36, 1.0), 0.7).total == unit.total);

    const auto w = testutil::random_vector(36, rng, 0.1, 1);
    const auto parts = objective(x, y, K, D, w, 0.7);
    const auto Kd = oracle::dense(K);
    const auto Dd = oracle::dense_gradient(6, 6);
    const Eigen::VectorXd g = Dd * oracle::vec(x);
    double reg = 0;
    for (std::size_t i = 0; i < 36; ++i) reg += w[i] * std::hypot(g[i], g[36 + i]);
    const double fit = 0.5 * (Kd * oracle::vec(x) - oracle::vec(y)).squaredNorm();
    CHECK(std::abs(parts.fit - fit) <= 1e-12 * fit);
    CHECK(std::abs(parts.reg - 0.7 * reg) <= 1e-12 * reg);
    CHECK(parts.total == parts.fit + parts.reg);
}

TEST_CASE("prox of F1*: plug-in values and the printed constants") {
    const std::vector<double> y{0.0}, p{4.0};
    CHECK(prox_f1_star(p, y, 1.0, F1ProxVariant::paper)[0] == 1.0);
    CHECK(prox_f1_star(p, y, 1.0, F1ProxVariant::textbook)[0] == 2.0);
    Rng rng(2);
    const auto yy = testutil::random_vector(50, rng);
    for (double sigma : {0.1, 0.37, 2.0}) {
        std::vector<double> v(50);
        for (std::size_t i = 0; i < 50; ++i) v[i] = sigma * yy[i];
        for (auto var : {F1ProxVariant::paper, F1ProxVariant::textbook})
            for (double r : prox_f1_star(v, yy, sigma, var)) CHECK(r == 0.0);
        const auto pp = testutil::random_vector(50, rng, -5, 5);
        const auto out = prox_f1_star(pp, yy, sigma, F1ProxVariant::paper);
        for (std::size_t i = 0; i < 50; ++i) CHECK(out[i] == (pp[i] - sigma * yy[i]) / (1 + 3 * sigma));
    }
}

TEST_CASE("prox of F1*: textbook variant satisfies the Moreau identity") {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        const double sigma = rng.uniform(0.01, 10.0);
        const auto p = testutil::random_vector(5, rng, -10, 10);
        const auto y = testutil::random_vector(5, rng, -10, 10);
        const auto star = prox_f1_star(p, y, sigma, F1ProxVariant::textbook);
        for (std::size_t i = 0; i < 5; ++i) {
            // prox of F / sigma for F = 1/2 ||. - y||^2, evaluated at p / sigma
            const double primal = (y[i] + p[i]) / (1 + sigma);
            CHECK(std::abs(star[i] + sigma * primal - p[i]) <= 1e-10 * (1 + std::abs(p[i])));
        }
    }
}

TEST_CASE("prox of F2*: projection onto per-pixel disks") {
    const std::vector<double> w{1.0, 0.5};
    const std::vector<double> inside{0.1, 0.2, 0.3, -0.1};
    CHECK(prox_f2_star(inside, w, 1.0) == inside);
    const auto out = prox_f2_star(std::vector<double>{3, 0, 4, 0}, std::vector<double>{1.0, 1.0}, 1.0);
    CHECK(out[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(out[2] == doctest::Approx(0.8).epsilon(1e-15));

    Rng rng(4);
    const std::size_t n = 10000;
    const auto q = testutil::random_vector(2 * n, rng, -3, 3);
    const auto ww = testutil::random_vector(n, rng, 0, 1);
    const double lambda = 2.5;
    const auto pr = prox_f2_star(q, ww, lambda);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i) bad += std::hypot(pr[i], pr[n + i]) > lambda * ww[i] + 1e-15;
    CHECK(bad == 0);
}

TEST_CASE("cp_solve: lambda 0, K identity recovers y") {
    const std::size_t side = 6, n = side * side;
    const auto K = SparseOperator::identity(n);
    const GradientOperator D(side, side);
    Rng rng(5);
    const auto y = testutil::random_vector(n, rng, 0, 1);
    SolverConfig cfg;
    cfg.lambda = 0.0;
    cfg.max_iter = 2000;
    cfg.eps_x = 1e-12;
    const auto r = cp_solve(K, D, y, {}, cfg);
    CHECK(r.trace.records.size() <= 2000);
    CHECK(norm_inf(difference(r.x, y)) <= 1e-6);
}

TEST_CASE("cp_solve: 4x4, 6 rays, lambda 0.1 agrees with the subgradient oracle") {
    const auto t = oracle::tiny_instance(0);
    REQUIRE(t.side == 4);
    REQUIRE(t.K.rows() == 6);
    const GradientOperator D(4, 4);
    SolverConfig cfg;
    cfg.lambda = t.lambda;
    cfg.max_iter = 100000;
    cfg.diagnostics_every = cfg.max_iter;
    const auto r = cp_solve(t.K, D, t.y, {}, cfg);
    const double jcp = objective(r.x, t.y, t.K, D, {}, t.lambda).total;
    const double ref = oracle::subgradient_minimum(oracle::dense(t.K), oracle::dense_gradient(4, 4), oracle::vec(t.y),
                                                   t.lambda, 1000000, 2.0);
    CHECK(std::abs(jcp - ref) <= 1e-5 * std::abs(ref));

    // The literal gap is finite and small at this optimum.
    const double gap = primal_dual_gap(r.state, t.K, D, t.y, {}, t.lambda);
    CHECK(std::isfinite(gap));
    CHECK(std::abs(gap) <= 1e-4 * (1 + std::abs(jcp)));
}

TEST_CASE("cp_solve: unit weights and no weights give identical iterates") {
    const auto pb = preset(16);
    SolverConfig cfg;
    cfg.max_iter = 150;
    const auto a = cp_solve(pb.K, pb.D, pb.y.values, {}, cfg);
    const auto b = cp_solve(pb.K, pb.D, pb.y.values, std::vector<double>(256, 1.0), cfg);
    CHECK(a.x == b.x);
    CHECK(a.state.q == b.state.q);
}

TEST_CASE("cp_solve: iterates stay nonnegative") {
    const auto pb = preset(16);
    for (std::size_t it = 1; it <= 30; ++it) {
        SolverConfig cfg;
        cfg.max_iter = it;
        const auto r = cp_solve(pb.K, pb.D, pb.y.values, pb.w, cfg);
        CHECK(r.trace.records.size() == it);
        for (double v : r.x) REQUIRE(v >= 0.0);
    }
}

TEST_CASE("cp_solve: objective drops from x0 and the bounded gap trends down") {
    for (std::size_t side : {32, 64}) {
        const auto pb = preset(side);
        for (int unit = 0; unit < 2; ++unit) {
            const std::vector<double> w = unit ? std::vector<double>{} : pb.w;
            SolverConfig cfg;
            cfg.max_iter = 1000;
            const auto r = cp_solve(pb.K, pb.D, pb.y.values, w, cfg);
            const std::vector<double> x0(side * side, 0.0);
            CHECK(objective(r.x, pb.y.values, pb.K, pb.D, w, cfg.lambda).total <
                  objective(x0, pb.y.values, pb.K, pb.D, w, cfg.lambda).total);
            double prev = std::numeric_limits<double>::infinity();
            std::size_t bad = 0;
            for (std::size_t j = 1; 10 * j <= r.trace.records.size(); ++j) {
                const double g = r.trace.records[10 * j - 1].pdg_bounded;
                bad += g > 1.1 * prev;
                prev = g;
            }
            CHECK(bad == 0);
            // With a TV dual the literal gap is almost always infinite on the
            // presets, so it never triggers the stop.
            CHECK(r.trace.reason == Termination::max_iter);
        }
    }
}

TEST_CASE("cp_solve: the printed prox constants also converge on the preset") {
    const auto pb = preset(32);
    SolverConfig cfg;
    cfg.max_iter = 2000;
    cfg.f1_prox_variant = F1ProxVariant::paper;
    const auto r = cp_solve(pb.K, pb.D, pb.y.values, pb.w, cfg);
    CHECK(r.trace.records.back().rel_change < 1e-4);
    CHECK(r.trace.records.back().pdg_bounded < 0.01 * r.trace.records[9].pdg_bounded);
}

TEST_CASE("primal-dual gap: perfect pair and infeasible dual") {
    const std::size_t n = 9;
    const auto K = SparseOperator::identity(n);
    const GradientOperator D(3, 3);
    Rng rng(6);
    const auto y = testutil::random_vector(n, rng, 0, 1);
    auto st = zero_state(n, n);
    st.x = y;
    CHECK(primal_dual_gap(st, K, D, y, {}, 0.0) == 0.0);

    st.q = testutil::random_vector(2 * n, rng, -50, 50);
    CHECK(primal_dual_gap(st, K, D, y, {}, 1.0) == kInfiniteGap);
    // The box only relaxes x >= 0; q outside the disks stays infinite.
    CHECK(bounded_primal_dual_gap(st, K, D, y, {}, 1.0, 1.0) == kInfiniteGap);
    st.q = prox_f2_star(st.q, std::vector<double>(n, 1.0), 1.0);
    st.p.assign(n, 1.0);
    CHECK(primal_dual_gap(st, K, D, y, {}, 1.0) == kInfiniteGap);
    CHECK(std::isfinite(bounded_primal_dual_gap(st, K, D, y, {}, 1.0, 1.0)));

    // An infinite gap never satisfies the gap stop.
    SolverConfig cfg;
    cfg.lambda = 1.0;
    cfg.max_iter = 20;
    cfg.eps_j = 1e300;
    const auto r = cp_solve(build_projector(Geometry::parallel(3, 2, 5)), D, std::vector<double>(10, 1.0), {}, cfg);
    bool any_inf = false;
    for (const auto& rec : r.trace.records) any_inf = any_inf || std::isinf(rec.pdg);
    CHECK(any_inf);
    CHECK(r.trace.records.front().k == 1);
    if (r.trace.reason == Termination::pdg) CHECK(std::isfinite(r.trace.records.back().pdg));
}

TEST_CASE("cp_solve: termination reasons") {
    const auto t = oracle::tiny_instance(1);
    const GradientOperator D(t.side, t.side);
    SolverConfig cfg;
    cfg.lambda = t.lambda;
    cfg.max_iter = 50000;
    cfg.eps_j = 1e-9;
    auto r = cp_solve(t.K, D, t.y, {}, cfg);
    CHECK(r.trace.reason == Termination::pdg);
    CHECK(r.trace.records.back().pdg <= 1e-9);
    CHECK(r.trace.records.size() < 50000);

    cfg.eps_j = 0;
    cfg.eps_x = 1e-6;
    r = cp_solve(t.K, D, t.y, {}, cfg);
    CHECK(r.trace.reason == Termination::rel_change);
    CHECK(r.trace.records.back().rel_change <= 1e-6);

    cfg.eps_x = 0;
    cfg.max_iter = 37;
    r = cp_solve(t.K, D, t.y, {}, cfg);
    CHECK(r.trace.reason == Termination::max_iter);
    CHECK(r.trace.records.size() == 37);
    for (std::size_t i = 0; i < 37; ++i) CHECK(r.trace.records[i].k == i + 1);
}

TEST_CASE("cp_solve: deterministic traces") {
    const auto pb = preset(16);
    SolverConfig cfg;
    cfg.max_iter = 80;
    const auto a = cp_solve(pb.K, pb.D, pb.y.values, pb.w, cfg);
    const auto b = cp_solve(pb.K, pb.D, pb.y.values, pb.w, cfg);
    CHECK(a.x == b.x);
    REQUIRE(a.trace.records.size() == b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        const auto &ra = a.trace.records[i], &rb = b.trace.records[i];
        CHECK(ra.objective == rb.objective);
        CHECK(ra.pdg_bounded == rb.pdg_bounded);
        CHECK(ra.rel_change == rb.rel_change);
    }
}

TEST_CASE("cp_solve: warm start, step warning, divergence") {
    const auto pb = preset(16);
    SolverConfig cfg;
    cfg.max_iter = 200;
    const auto a = cp_solve(pb.K, pb.D, pb.y.values, pb.w, cfg);
    CHECK_FALSE(a.trace.step_warning);
    CHECK(a.trace.sigma * a.trace.tau * a.trace.operator_norm * a.trace.operator_norm <= 1.0 + 1e-12);

    cfg.max_iter = 5;
    cfg.sigma = 1.0;
    cfg.tau = 1.0;
    CHECK(cp_solve(pb.K, pb.D, pb.y.values, pb.w, cfg).trace.step_warning);

    cfg = {};
    cfg.max_iter = 3;
    auto bad = pb.y.values;
    bad[4] = std::nan("");
    CHECK_THROWS_AS(cp_solve(pb.K, pb.D, bad, pb.w, cfg), SolverDivergence);
    CHECK_THROWS_AS(cp_solve(pb.K, pb.D, std::vector<double>(3, 0.0), pb.w, cfg), Error);
    CHECK_THROWS_AS(cp_solve(pb.K, pb.D, pb.y.values, std::vector<double>(3, 1.0), cfg), Error);
}

TEST_CASE("solver config validation and variant names") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.beta = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.lambda = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.max_iter = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.eps_x = -1e-3;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK(parse_f1_variant("paper") == F1ProxVariant::paper);
    CHECK(parse_gap_variant("textbook") == GapVariant::textbook);
    CHECK_THROWS_AS(parse_f1_variant("other"), Error);
    CHECK(to_string(Termination::rel_change) == "rel_change");
}

TEST_CASE("trace csv layout") {
    const auto t = oracle::tiny_instance(2);
    const GradientOperator D(t.side, t.side);
    SolverConfig cfg;
    cfg.max_iter = 4;
    const auto r = cp_solve(t.K, D, t.y, {}, cfg);
    testutil::TempDir dir("trace");
    write_trace_csv(r.trace, dir / "trace.csv");
    std::ifstream in(dir / "trace.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "iter,objective,fit,reg,pdg,rel_change,wall_ms");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    }
    CHECK(rows == 4);
}
