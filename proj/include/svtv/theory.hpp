#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "svtv/geometry.hpp"
#include "svtv/gradient.hpp"
#include "svtv/phantom.hpp"
#include "svtv/reconstructors.hpp"
#include "svtv/solver.hpp"
#include "svtv/sparse.hpp"
#include "svtv/types.hpp"
#include "svtv/weights.hpp"

namespace svtv {

// ---- midpoint inequality ---------------------------------------------------

struct MidpointReport {
    std::size_t n_trials = 0;
    double max_violation = 0.0;  ///< max of lhs - rhs (<= 0 when the inequality holds)
    double max_scale = 0.0;      ///< max of 1 + |J| seen
    std::size_t violations = 0;  ///< trials with lhs - rhs > 1e-10 * scale
};

/// J((x1 + x2) / 2) - [ (J(x1) + J(x2)) / 2 - ||K x1 - K x2||^2 / 8 ] for unweighted TV.
double midpoint_gap(std::span<const double> x1, std::span<const double> x2, std::span<const double> y,
                    const SparseOperator& K, const GradientOperator& D, double lambda);

/// Random pairs with entries uniform in [0, 1).
MidpointReport check_midpoint_inequality(const SparseOperator& K, const GradientOperator& D,
                                         std::span<const double> y_delta, double lambda, std::size_t n_trials,
                                         std::uint64_t seed);

// ---- normalized gradient identity -----------------------------------------

/// |norm21(Dx) - <Dhat x, Dx>| / (1 + norm21(Dx)) for one image.
double dhat_identity_error(const Image& x, Boundary boundary = Boundary::forward);
/// Max of the above over a nonempty set.
double check_dhat_identity(std::span<const Image> images, Boundary boundary = Boundary::forward);

// ---- uniqueness hypotheses --------------------------------------------------

struct UniquenessTolerances {
    double zero_gradient = 1e-8;  ///< |D x1|_i at or below this counts as zero
    double residual = 1e-6;       ///< condition (i) holds when the relative residual is below
    double singular = 1e-8;       ///< condition (ii) holds when the min singular value exceeds
};

struct UniquenessReport {
    double cond1_residual = 0.0;
    double cond2_min_sv = 0.0;  ///< +inf when S1 = {0}
    bool cond1_holds = false;
    bool cond2_holds = false;
    std::size_t zero_set_size = 0;
    std::size_t s1_dimension = 0;
};

/// (i) relative least-squares residual of K^T z = D^T Dhat x1; (ii) smallest singular
/// value of K on an orthonormal basis of S1 = { v : (D v)_i = 0 for i in the zero set }.
UniquenessReport check_uniqueness_conditions(const SparseOperator& K, const GradientOperator& D,
                                             std::span<const double> x1, const UniquenessTolerances& tol = {});

// ---- induced (2,1) norm of D ------------------------------------------------

struct InducedNormBracket {
    double lower = 0.0;  ///< max of ||D x||_{2,1} / ||x||_1 over the candidate set
    double upper = 0.0;  ///< max column l1 norm of D
};

InducedNormBracket d_norm_21_from_l1(const GradientOperator& D, std::size_t n_random = 100, std::uint64_t seed = 7);

// ---- objective distance bound ------------------------------------------------

struct ObjectiveBoundTrial {
    double lhs = 0.0;  ///< |J_GT(x) - J_Psi(x)|
    double rhs = 0.0;
    double slack = 0.0;  ///< rhs - lhs
};

struct ObjectiveBoundReport {
    double lipschitz = 0.0;
    double d_norm = 0.0;  ///< upper bound used on the right-hand side
    double d_norm_lower = 0.0;
    double eta_1 = 0.0;
    double c_eps = 0.0;
    double noise_l1 = 0.0;
    std::vector<ObjectiveBoundTrial> trials;
    std::size_t violations = 0;
};

struct ObjectiveBoundInput {
    const SparseOperator* K = nullptr;
    const GradientOperator* D = nullptr;
    const Image* x_gt = nullptr;
    std::span<const double> noise;  ///< the e in y_delta = K x_gt + e
    ReconstructorSpec psi;
    ReconstructorContext ctx;
    WeightParams params;
    double lambda = 5.0;
    /// Images over which eta_1 and C^eps are estimated; x_gt is always added.
    std::vector<Image> accuracy_samples;
    std::size_t n_noise = 10;
    std::uint64_t seed = 11;
};

/// |J_GT(x) - J_Psi(x)| <= lambda L ||D||_{2,1} (eta_1 + C^eps ||e||_1) ||D x||_{2,1}
/// for each trial image x, where J_GT uses weights from x_gt and J_Psi from Psi(y_delta).
ObjectiveBoundReport check_objective_bound(const ObjectiveBoundInput& in, std::span<const Image> trial_images);

// ---- regularizer agreement between two converged solves ----------------------

struct RegularizerAgreement {
    double reg_a = 0.0;
    double reg_b = 0.0;
    double gap_a = 0.0;  ///< gap reached by each run: literal when finite, else bounded
    double gap_b = 0.0;
    bool holds = false;  ///< |reg_a - reg_b| <= 10 max(gap_a, gap_b), plus rounding slack
};

RegularizerAgreement check_regularizer_agreement(const SparseOperator& K, const GradientOperator& D,
                                                 std::span<const double> y_delta, std::span<const double> w,
                                                 const SolverConfig& cfg, std::span<const double> x0_a,
                                                 std::span<const double> x0_b);

// ---- convergence experiments ------------------------------------------------

struct ConvergenceRecord {
    double parameter = 0.0;   ///< nu (noise experiment) or k (blend experiment)
    double distance = 0.0;    ///< l1 distance between the two minimizers
    double hypothesis = 0.0;  ///< blend experiment: || |D Psi_k| - |D x_gt| ||_1
    std::size_t iterations = 0;
};

struct ExperimentProblem {
    Image gt;
    Geometry geom;
    SparseOperator K;
    Boundary boundary = Boundary::forward;
    WeightParams weights;
    SolverConfig solver;
    std::uint64_t noise_seed = 0;
    double fbp_cutoff = 1.0;
};

/// Preset phantom on a parallel geometry with covering detectors.
ExperimentProblem make_experiment_problem(std::string_view preset, std::size_t side, std::size_t n_angles,
                                          const WeightParams& weights, const SolverConfig& solver,
                                          std::uint64_t noise_seed, Boundary boundary = Boundary::forward);

/// Distances || x*_{GT, nu} - x*_{GT, 0} ||_1 with weights from the ground truth.
/// The same seed is used for every level so the noise only changes scale.
std::vector<ConvergenceRecord> noise_convergence_experiment(std::span<const double> nus,
                                                            const ExperimentProblem& problem);

/// (1 - 1/k) x_gt + (1/k) x_fbp
Image blend_reconstruction(const Image& gt, const Image& fbp_image, double k);

/// Sum_i | |D a|_i - |D b|_i |
double gradient_magnitude_distance(const Image& a, const Image& b, Boundary boundary = Boundary::forward);

/// Psi_k blends of the ground truth and FBP(y_delta) at noise level nu; records the
/// hypothesis distance and || x*_{Psi_k} - x*_{GT} ||_1 per k.
std::vector<ConvergenceRecord> reconstructor_convergence_experiment(std::span<const double> ks, double nu,
                                                                    const ExperimentProblem& problem);

/// True when each entry is at most (1 + slack) times the previous one.
bool nonincreasing_within(std::span<const double> values, double slack);

}  // namespace svtv
