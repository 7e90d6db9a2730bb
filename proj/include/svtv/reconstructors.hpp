#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svtv/geometry.hpp"
#include "svtv/gradient.hpp"
#include "svtv/sparse.hpp"
#include "svtv/types.hpp"

namespace svtv {

enum class ReconstructorKind { gt, fbp, early_tv, file };

ReconstructorKind parse_reconstructor_kind(std::string_view name);
std::string_view to_string(ReconstructorKind k);

struct ReconstructorSpec {
    ReconstructorKind kind = ReconstructorKind::fbp;
    double cutoff = 1.0;           ///< fbp: fraction of Nyquist kept by the ramp filter
    double lambda = 5.0;           ///< early_tv
    std::size_t iterations = 100;  ///< early_tv iteration cap
    std::filesystem::path path;    ///< file

    void validate() const;
    std::string id() const;
};

/// Everything a reconstructor may need besides the sinogram. Pointers are
/// non-owning; `K` is built from `geom` on demand when null.
struct ReconstructorContext {
    const Geometry* geom = nullptr;
    const SparseOperator* K = nullptr;
    const Image* ground_truth = nullptr;  ///< gt kind only
    Boundary boundary = Boundary::forward;
    double operator_norm = 0.0;           ///< cached ||[K; D]||_2 for early_tv, 0 = compute
};

/// x_tilde = Psi(y).
Image reconstruct(const ReconstructorSpec& spec, const Sinogram& y, const ReconstructorContext& ctx);

/// Ramp-filtered backprojection through K^T, scaled by pi / (2 n_angles), clamped to >= 0.
/// Fan data is first rebinned to a parallel geometry by nearest angle and offset.
Image fbp(const Sinogram& y, const Geometry& geom, double cutoff = 1.0, const SparseOperator* K = nullptr);

/// Frequency response of the band-limited Ram-Lak filter for a padded length.
std::vector<double> ramp_filter(std::size_t padded_length, double cutoff);

/// max over samples of || Psi(K x) - x ||_p.
double estimate_accuracy(const ReconstructorSpec& spec, std::span<const Image> samples, const SparseOperator& K,
                         double p_norm, const ReconstructorContext& ctx);

struct StabilityDraw {
    std::size_t sample = 0;
    std::size_t draw = 0;
    double noise_norm = 0.0;  ///< ||e||_p
    double error = 0.0;       ///< ||Psi(K x + e) - x||_p
};

struct ReconstructorQuality {
    double eta_p = 0.0;   ///< empirical accuracy
    double c_eps = 0.0;   ///< empirical epsilon-stability constant
    double p_norm = 2.0;
    double epsilon = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_noise = 0;
    std::vector<StabilityDraw> draws;
};

/// Noise vector number `draw` for sample `sample`: Gaussian direction scaled to a
/// p-norm drawn uniformly from (0, epsilon]. Independent of how many draws are taken.
std::vector<double> stability_noise(std::size_t m, double p_norm, double epsilon, std::uint64_t seed,
                                    std::size_t sample, std::size_t draw);

/// sup over sampled (x, e), ||e||_p <= epsilon, of (||Psi(Kx + e) - x||_p - eta_p) / ||e||_p.
ReconstructorQuality estimate_stability(const ReconstructorSpec& spec, std::span<const Image> samples,
                                        const SparseOperator& K, double p_norm, double epsilon, std::size_t n_noise,
                                        std::uint64_t seed, const ReconstructorContext& ctx);

}  // namespace svtv
