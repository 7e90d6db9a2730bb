#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "svtv/sparse.hpp"
#include "svtv/types.hpp"

namespace svtv {

enum class ShapeKind { disk, rect, cross, ring };

/// Shape coordinates are in pixel units with (0, 0) at the top-left corner of the
/// grid; pixel (r, c) is inside a shape when its centre (c + 0.5, r + 0.5) is.
///   disk:  radius = size
///   rect:  half-width = size, half-height = size2
///   cross: arm half-length = size, arm half-thickness = size2
///   ring:  outer radius = size, inner radius = size2
struct Shape {
    ShapeKind kind = ShapeKind::disk;
    double cx = 0.0;
    double cy = 0.0;
    double size = 0.0;
    double size2 = 0.0;
    double intensity = 1.0;
};

struct PhantomSpec {
    std::size_t side = 0;
    double background = 0.0;
    std::vector<Shape> shapes;

    void validate() const;
};

/// Later shapes overwrite earlier ones.
Image make_phantom(const PhantomSpec& spec);

/// Names accepted by preset_phantom().
std::vector<std::string_view> phantom_presets();

/// "synthetic-ct": body disk with homogeneous masses, a high-density disk, a ring and
/// a one-pixel-thick cross, scaled to `side`. "disk": one centred disk of radius side/4.
PhantomSpec preset_phantom(std::string_view name, std::size_t side);

struct NoiseSpec {
    double nu = 0.0;  ///< relative noise level
    std::uint64_t seed = 0;
};

struct SimulatedData {
    Sinogram noisy;       ///< y + e
    Sinogram clean;       ///< y = K x
    double delta = 0.0;   ///< ||e||_2 = nu * ||y||_2
    bool zero_signal_warning = false;
};

/// y = K x, e = nu * (z / ||z||_2) * ||y||_2 with z ~ N(0, I) drawn from `noise.seed`.
SimulatedData simulate_sinogram(const Image& x_gt, const SparseOperator& K, std::size_t n_angles,
                                std::size_t n_detectors, const NoiseSpec& noise);

/// The noise vector e alone, length m. Returns zeros when ||y||_2 == 0 or nu == 0.
std::vector<double> sample_noise(std::span<const double> clean, const NoiseSpec& noise);

}  // namespace svtv
