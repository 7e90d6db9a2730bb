#include "svtv/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "svtv/power_method.hpp"

namespace svtv {

namespace {

struct GapInputs {
    std::span<const double> x;
    std::span<const double> kx;
    std::span<const double> dx;
    std::span<const double> p;
    std::span<const double> q;
    std::span<const double> ktp;
    std::span<const double> dtq;
};

double fit_term(std::span<const double> kx, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < kx.size(); ++i) {
        const double r = kx[i] - y[i];
        s += r * r;
    }
    return 0.5 * s;
}

double reg_term(std::span<const double> dx, std::span<const double> w, double lambda) {
    const std::size_t n = dx.size() / 2;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (w.empty() ? 1.0 : w[i]) * std::hypot(dx[i], dx[n + i]);
    return lambda * s;
}

double f1_conjugate(std::span<const double> p, std::span<const double> y, F1ProxVariant variant) {
    const double c = variant == F1ProxVariant::textbook ? 0.5 : 1.5;
    return c * dot(p, p) + dot(p, y);
}

// upper <= 0 selects the literal indicator of x >= 0; otherwise the box [0, upper].
double gap_from_parts(const GapInputs& in, std::span<const double> y, std::span<const double> w, double lambda,
                      GapVariant variant, F1ProxVariant f1_variant, double upper) {
    const std::size_t n = in.x.size();
    const double scale = 1.0 + norm_inf(in.ktp) + norm_inf(in.dtq);
    const double tol = 1e-9 * scale;

    const double primal = fit_term(in.kx, y) + reg_term(in.dx, w, lambda);
    for (double v : in.x)
        if (v < -tol) return kInfiniteGap;

    // F2* is the indicator of the per-pixel disks of radius lambda w_i.
    for (std::size_t i = 0; i < n; ++i) {
        const double radius = lambda * (w.empty() ? 1.0 : w[i]);
        if (std::hypot(in.q[i], in.q[n + i]) > radius + tol) return kInfiniteGap;
    }

    const double sign = variant == GapVariant::textbook ? -1.0 : 1.0;
    double g_star = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sign * (in.ktp[i] + in.dtq[i]);
        if (upper > 0.0) {
            g_star += upper * std::max(s, 0.0);
        } else if (s > tol) {
            return kInfiniteGap;
        }
    }
    return primal + f1_conjugate(in.p, y, f1_variant) + g_star;
}

double gap_impl(const SolverState& state, const SparseOperator& K, const GradientOperator& D,
                std::span<const double> y, std::span<const double> w, double lambda, GapVariant variant,
                F1ProxVariant f1_variant, double upper) {
    const std::size_t n = K.cols();
    require(state.x.size() == n && state.p.size() == K.rows() && state.q.size() == 2 * n,
            "primal_dual_gap: state sizes do not match the operators");
    require(y.size() == K.rows(), "primal_dual_gap: sinogram length does not match K");
    require(w.empty() || w.size() == n, "primal_dual_gap: weight length does not match image");
    const auto kx = K.apply(state.x);
    std::vector<double> dx(2 * n);
    D.apply(state.x, dx);
    const auto ktp = K.apply(state.p, ApplyMode::adjoint);
    std::vector<double> dtq(n);
    D.adjoint(state.q, dtq);
    return gap_from_parts({state.x, kx, dx, state.p, state.q, ktp, dtq}, y, w, lambda, variant, f1_variant, upper);
}

}  // namespace

F1ProxVariant parse_f1_variant(std::string_view name) {
    if (name == "textbook") return F1ProxVariant::textbook;
    if (name == "paper") return F1ProxVariant::paper;
    throw Error("unknown f1_prox_variant '" + std::string(name) + "' (expected textbook|paper)");
}

GapVariant parse_gap_variant(std::string_view name) {
    if (name == "textbook") return GapVariant::textbook;
    if (name == "paper") return GapVariant::paper;
    throw Error("unknown gap_variant '" + std::string(name) + "' (expected textbook|paper)");
}

std::string_view to_string(F1ProxVariant v) { return v == F1ProxVariant::textbook ? "textbook" : "paper"; }
std::string_view to_string(GapVariant v) { return v == GapVariant::textbook ? "textbook" : "paper"; }

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::pdg:
            return "pdg";
        case Termination::rel_change:
            return "rel_change";
        case Termination::max_iter:
            return "max_iter";
    }
    return "max_iter";
}

void SolverConfig::validate() const {
    require(std::isfinite(lambda) && lambda >= 0.0, "solver: lambda must be >= 0");
    require(beta >= 0.0 && beta <= 1.0, "solver: beta must lie in [0, 1]");
    require(sigma >= 0.0 && tau >= 0.0, "solver: sigma and tau must be > 0 (or 0 for the default)");
    require(max_iter >= 1, "solver: max_iter must be >= 1");
    require(eps_j >= 0.0 && eps_x >= 0.0, "solver: tolerances must be >= 0");
    require(diagnostics_every >= 1, "solver: diagnostics_every must be >= 1");
}

ObjectiveParts objective(std::span<const double> x, std::span<const double> y_delta, const SparseOperator& K,
                         const GradientOperator& D, std::span<const double> w, double lambda) {
    require(x.size() == K.cols() && x.size() == D.pixels(), "objective: image length does not match operators");
    require(y_delta.size() == K.rows(), "objective: sinogram length does not match K");
    require(w.empty() || w.size() == x.size(), "objective: weight length does not match image");
    const auto kx = K.apply(x);
    std::vector<double> dx(2 * x.size());
    D.apply(x, dx);
    ObjectiveParts out;
    out.fit = fit_term(kx, y_delta);
    out.reg = reg_term(dx, w, lambda);
    out.total = out.fit + out.reg;
    return out;
}

std::vector<double> prox_f1_star(std::span<const double> v, std::span<const double> y_delta, double sigma,
                                 F1ProxVariant variant) {
    require(v.size() == y_delta.size(), "prox_f1_star: length mismatch");
    const double denom = variant == F1ProxVariant::textbook ? 1.0 + sigma : 1.0 + 3.0 * sigma;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - sigma * y_delta[i]) / denom;
    return out;
}

std::vector<double> prox_f2_star(std::span<const double> q, std::span<const double> w, double lambda) {
    require(q.size() == 2 * w.size(), "prox_f2_star: q must have length 2n for n weights");
    const std::size_t n = w.size();
    std::vector<double> out(q.begin(), q.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double radius = lambda * w[i];
        const double r = std::hypot(q[i], q[n + i]);
        if (r > radius) {
            const double s = radius / r;
            out[i] = q[i] * s;
            out[n + i] = q[n + i] * s;
        }
    }
    return out;
}

double primal_dual_gap(const SolverState& state, const SparseOperator& K, const GradientOperator& D,
                       std::span<const double> y_delta, std::span<const double> w, double lambda, GapVariant variant,
                       F1ProxVariant f1_variant) {
    return gap_impl(state, K, D, y_delta, w, lambda, variant, f1_variant, 0.0);
}

double bounded_primal_dual_gap(const SolverState& state, const SparseOperator& K, const GradientOperator& D,
                               std::span<const double> y_delta, std::span<const double> w, double lambda,
                               double upper, GapVariant variant, F1ProxVariant f1_variant) {
    require(upper > 0.0, "bounded gap: box bound must be > 0");
    return gap_impl(state, K, D, y_delta, w, lambda, variant, f1_variant, upper);
}

double stacked_operator_norm(const SparseOperator& K, const GradientOperator& D) {
    return power_method_norm(stack(K, D.to_sparse())).value;
}

SolveResult cp_solve(const SparseOperator& K, const GradientOperator& D, std::span<const double> y_delta,
                     std::span<const double> w, const SolverConfig& cfg, std::span<const double> x0) {
    cfg.validate();
    const std::size_t n = K.cols();
    const std::size_t m = K.rows();
    require(D.pixels() == n, "cp_solve: gradient grid does not match projector columns");
    require(y_delta.size() == m, "cp_solve: sinogram length does not match projector rows");
    require(w.empty() || w.size() == n, "cp_solve: weight length does not match image");
    require(x0.empty() || x0.size() == n, "cp_solve: initial image length does not match");
    const std::vector<double> weights = w.empty() ? std::vector<double>(n, 1.0) : std::vector<double>(w.begin(), w.end());
    for (double v : weights) require(std::isfinite(v) && v >= 0.0, "cp_solve: weights must be finite and >= 0");

    SolveResult result;
    SolverTrace& trace = result.trace;
    trace.operator_norm = cfg.operator_norm > 0.0 ? cfg.operator_norm : stacked_operator_norm(K, D);
    require(trace.operator_norm > 0.0, "cp_solve: [K; D] is the zero operator");
    trace.sigma = cfg.sigma > 0.0 ? cfg.sigma : 1.0 / trace.operator_norm;
    trace.tau = cfg.tau > 0.0 ? cfg.tau : 1.0 / trace.operator_norm;
    trace.step_warning = trace.sigma * trace.tau * trace.operator_norm * trace.operator_norm > 1.0 + 1e-12;
    const double sigma = trace.sigma;
    const double tau = trace.tau;
    const double f1_denom = cfg.f1_prox_variant == F1ProxVariant::textbook ? 1.0 + sigma : 1.0 + 3.0 * sigma;

    SolverState& st = result.state;
    st.x = x0.empty() ? std::vector<double>(n, 0.0) : std::vector<double>(x0.begin(), x0.end());
    st.x_bar = st.x;
    st.p.assign(m, 0.0);
    st.q.assign(2 * n, 0.0);

    // K x and D x are carried along so that K x_bar and D x_bar follow by linearity.
    std::vector<double> kx = K.apply(st.x);
    std::vector<double> dx(2 * n);
    D.apply(st.x, dx);
    std::vector<double> kx_bar = kx;
    std::vector<double> dx_bar = dx;
    std::vector<double> kx_old(m), dx_old(2 * n), x_old(n);
    std::vector<double> ktp(n), dtq(n);

    const auto start = std::chrono::steady_clock::now();
    auto diverged = [&](const std::string& what) {
        throw SolverDivergence("cp_solve: non-finite " + what + " at iteration " + std::to_string(st.k + 1), trace);
    };

    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        // Dual ascent on p.
        for (std::size_t i = 0; i < m; ++i) {
            st.p[i] = (st.p[i] + sigma * kx_bar[i] - sigma * y_delta[i]) / f1_denom;
            if (!std::isfinite(st.p[i])) diverged("p");
        }
        // Dual ascent on q, projected pixel-wise onto the weighted disks.
        for (std::size_t i = 0; i < n; ++i) {
            const double a = st.q[i] + sigma * dx_bar[i];
            const double b = st.q[n + i] + sigma * dx_bar[n + i];
            const double radius = cfg.lambda * weights[i];
            const double r = std::hypot(a, b);
            if (!std::isfinite(r)) diverged("q");
            const double s = r > radius ? radius / r : 1.0;
            st.q[i] = a * s;
            st.q[n + i] = b * s;
        }
        // Projected primal descent.
        K.apply_into(st.p, ktp, ApplyMode::adjoint);
        D.adjoint(st.q, dtq);
        x_old.swap(st.x);
        st.x.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            st.x[i] = std::max(0.0, x_old[i] - tau * (ktp[i] + dtq[i]));
            if (!std::isfinite(st.x[i])) diverged("x");
        }
        kx_old.swap(kx);
        dx_old.swap(dx);
        K.apply_into(st.x, kx);
        D.apply(st.x, dx);
        // Inertia.
        for (std::size_t i = 0; i < n; ++i) st.x_bar[i] = st.x[i] + cfg.beta * (st.x[i] - x_old[i]);
        for (std::size_t i = 0; i < m; ++i) kx_bar[i] = kx[i] + cfg.beta * (kx[i] - kx_old[i]);
        for (std::size_t i = 0; i < 2 * n; ++i) dx_bar[i] = dx[i] + cfg.beta * (dx[i] - dx_old[i]);
        st.k = it;

        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = st.x[i] - x_old[i];
            change += d * d;
        }
        change = std::sqrt(change);
        const double prev_norm = norm2(x_old);

        IterationRecord rec;
        rec.k = it;
        rec.rel_change = prev_norm > 0.0 ? change / prev_norm : (change == 0.0 ? 0.0 : kInfiniteGap);
        rec.diagnostics = it % cfg.diagnostics_every == 0 || it == cfg.max_iter;
        if (rec.diagnostics) {
            rec.fit = fit_term(kx, y_delta);
            rec.reg = reg_term(dx, weights, cfg.lambda);
            rec.objective = rec.fit + rec.reg;
            const GapInputs in{st.x, kx, dx, st.p, st.q, ktp, dtq};
            rec.pdg = gap_from_parts(in, y_delta, weights, cfg.lambda, cfg.gap_variant, cfg.f1_prox_variant, 0.0);
            rec.pdg_bounded = gap_from_parts(in, y_delta, weights, cfg.lambda, cfg.gap_variant, cfg.f1_prox_variant,
                                             cfg.gap_box_bound);
        } else {
            rec.objective = rec.fit = rec.reg = rec.pdg = rec.pdg_bounded = std::nan("");
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        trace.records.push_back(rec);

        if (cfg.eps_j > 0.0 && rec.diagnostics && rec.pdg != kInfiniteGap && rec.pdg <= cfg.eps_j) {
            trace.reason = Termination::pdg;
            break;
        }
        if (cfg.eps_x > 0.0 && change <= cfg.eps_x * prev_norm) {
            trace.reason = Termination::rel_change;
            break;
        }
    }
    result.x = st.x;
    return result;
}

void write_trace_csv(const SolverTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "iter,objective,fit,reg,pdg,rel_change,wall_ms\n";
    auto num = [](double v) -> std::string {
        if (std::isnan(v)) return "-";
        if (std::isinf(v)) return "inf";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    };
    for (const auto& r : trace.records) {
        out << r.k << ',' << num(r.objective) << ',' << num(r.fit) << ',' << num(r.reg) << ',' << num(r.pdg) << ','
            << num(r.rel_change) << ',' << num(r.wall_ms) << '\n';
    }
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace svtv
