#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "svtv/gradient.hpp"
#include "svtv/sparse.hpp"
#include "svtv/types.hpp"

namespace svtv {

/// `textbook`: prox of the conjugate of 1/2||. - y||^2, (v - sigma y) / (1 + sigma).
/// `paper`: the printed constants, (v - sigma y) / (1 + 3 sigma), with F1*(p) = 3/2||p||^2 + <p, y>.
enum class F1ProxVariant { textbook, paper };
/// Sign of the argument of G* in the gap: textbook uses -M^T z, paper uses +M^T z.
enum class GapVariant { textbook, paper };

F1ProxVariant parse_f1_variant(std::string_view name);
GapVariant parse_gap_variant(std::string_view name);
std::string_view to_string(F1ProxVariant v);
std::string_view to_string(GapVariant v);

/// Returned by primal_dual_gap when a dual indicator is violated.
inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

struct SolverConfig {
    double lambda = 5.0;
    double beta = 1.0;
    double sigma = 0.0;  ///< 0 selects 1 / ||M||_2
    double tau = 0.0;    ///< 0 selects 1 / ||M||_2
    std::size_t max_iter = 1000;
    double eps_j = 0.0;  ///< PDG tolerance; 0 disables the gap stop
    double eps_x = 0.0;  ///< relative-change tolerance; 0 disables it
    F1ProxVariant f1_prox_variant = F1ProxVariant::textbook;
    GapVariant gap_variant = GapVariant::textbook;
    /// Known ||M||_2 (skips the power method when > 0).
    double operator_norm = 0.0;
    /// Upper bound U of the box used by the bounded-gap diagnostic.
    double gap_box_bound = 1.0;
    /// Gap and objective are only evaluated every `diagnostics_every` iterations
    /// (and at the last one). The gap stop is checked on those iterations only.
    std::size_t diagnostics_every = 1;

    void validate() const;
};

struct SolverState {
    std::vector<double> x;
    std::vector<double> x_bar;
    std::vector<double> p;  ///< dual of the data term, length m
    std::vector<double> q;  ///< dual of the gradient term, length 2n
    std::size_t k = 0;
};

struct IterationRecord {
    std::size_t k = 0;
    double objective = 0.0;
    double fit = 0.0;
    double reg = 0.0;
    double pdg = 0.0;          ///< literal gap, kInfiniteGap when a dual indicator is violated
    double pdg_bounded = 0.0;  ///< gap with G* over the box [0, U]^n, finite on CP iterates
    double rel_change = 0.0;   ///< ||x^{k} - x^{k-1}|| / ||x^{k-1}||
    double wall_ms = 0.0;
    bool diagnostics = true;   ///< false: objective/gap fields were skipped this iteration
};

enum class Termination { pdg, rel_change, max_iter };
std::string_view to_string(Termination t);

struct SolverTrace {
    std::vector<IterationRecord> records;
    Termination reason = Termination::max_iter;
    double sigma = 0.0;
    double tau = 0.0;
    double operator_norm = 0.0;
    bool step_warning = false;  ///< sigma tau ||M||^2 > 1
};

struct SolveResult {
    std::vector<double> x;
    SolverState state;
    SolverTrace trace;
};

/// Raised on NaN/Inf iterates; carries the trace up to the failure.
class SolverDivergence : public Error {
public:
    SolverDivergence(const std::string& what, SolverTrace t) : Error(what), trace(std::move(t)) {}
    SolverTrace trace;
};

struct ObjectiveParts {
    double total = 0.0;
    double fit = 0.0;  ///< 1/2 ||K x - y||^2
    double reg = 0.0;  ///< lambda sum_i w_i |D x|_i
};

ObjectiveParts objective(std::span<const double> x, std::span<const double> y_delta, const SparseOperator& K,
                         const GradientOperator& D, std::span<const double> w, double lambda);

/// prox of sigma F1* evaluated at v (v is already p + sigma K x_bar).
std::vector<double> prox_f1_star(std::span<const double> v, std::span<const double> y_delta, double sigma,
                                 F1ProxVariant variant);

/// Pixel-paired projection of q (length 2n) onto the disks of radius lambda w_i.
std::vector<double> prox_f2_star(std::span<const double> q, std::span<const double> w, double lambda);

/// F(Mx) + G(x) + F*(z) + G*(s), s = -M^T z (textbook) or +M^T z (paper).
/// Indicator terms hold within 1e-9 * (1 + ||K^T p||_inf + ||D^T q||_inf);
/// otherwise kInfiniteGap is returned.
double primal_dual_gap(const SolverState& state, const SparseOperator& K, const GradientOperator& D,
                       std::span<const double> y_delta, std::span<const double> w, double lambda,
                       GapVariant variant = GapVariant::textbook,
                       F1ProxVariant f1_variant = F1ProxVariant::textbook);

/// Same gap with G replaced by the indicator of [0, U]^n, so G*(s) = U sum max(s_i, 0).
/// Always finite; used to follow convergence when the literal gap is infinite.
double bounded_primal_dual_gap(const SolverState& state, const SparseOperator& K, const GradientOperator& D,
                               std::span<const double> y_delta, std::span<const double> w, double lambda,
                               double upper, GapVariant variant = GapVariant::textbook,
                               F1ProxVariant f1_variant = F1ProxVariant::textbook);

/// Chambolle-Pock iterations with M = [K; D]. `w` empty means unit weights;
/// `x0` empty means the zero image. x_bar starts at x0, p and q at 0.
SolveResult cp_solve(const SparseOperator& K, const GradientOperator& D, std::span<const double> y_delta,
                     std::span<const double> w, const SolverConfig& cfg, std::span<const double> x0 = {});

/// ||[K; D]||_2 via the power method.
double stacked_operator_norm(const SparseOperator& K, const GradientOperator& D);

/// CSV with header iter,objective,fit,reg,pdg,rel_change,wall_ms.
void write_trace_csv(const SolverTrace& trace, const std::filesystem::path& path);

}  // namespace svtv
