#include "svtv/phantom.hpp"

#include <cmath>

#include "svtv/rng.hpp"

namespace svtv {

namespace {

bool inside(const Shape& s, double x, double y) {
    const double dx = x - s.cx;
    const double dy = y - s.cy;
    switch (s.kind) {
        case ShapeKind::disk:
            return dx * dx + dy * dy <= s.size * s.size;
        case ShapeKind::rect:
            return std::abs(dx) <= s.size && std::abs(dy) <= s.size2;
        case ShapeKind::cross:
            return (std::abs(dx) <= s.size && std::abs(dy) <= s.size2) ||
                   (std::abs(dy) <= s.size && std::abs(dx) <= s.size2);
        case ShapeKind::ring: {
            const double r2 = dx * dx + dy * dy;
            return r2 <= s.size * s.size && r2 >= s.size2 * s.size2;
        }
    }
    return false;
}

// Pixel-centre coordinate nearest to fraction u of the side.
double centre_at(double u, std::size_t side) { return std::floor(u * static_cast<double>(side)) + 0.5; }

}  // namespace

void PhantomSpec::validate() const {
    require(side >= 1, "phantom: side must be >= 1");
    require(background >= 0.0 && background <= 1.0, "phantom: background must lie in [0, 1]");
    const double s = static_cast<double>(side);
    for (const auto& shape : shapes) {
        require(shape.intensity >= 0.0 && shape.intensity <= 1.0, "phantom: shape intensity must lie in [0, 1]");
        require(shape.size > 0.0, "phantom: shape size must be > 0");
        require(shape.cx - shape.size >= 0.0 && shape.cx + shape.size <= s && shape.cy - shape.size >= 0.0 &&
                    shape.cy + shape.size <= s,
                "phantom: shape extends outside the grid");
        if (shape.kind == ShapeKind::ring) require(shape.size2 < shape.size, "phantom: ring inner radius >= outer");
    }
}

Image make_phantom(const PhantomSpec& spec) {
    spec.validate();
    Image img(spec.side, spec.side, spec.background);
    for (std::size_t r = 0; r < spec.side; ++r) {
        for (std::size_t c = 0; c < spec.side; ++c) {
            const double x = static_cast<double>(c) + 0.5;
            const double y = static_cast<double>(r) + 0.5;
            for (const auto& shape : spec.shapes)
                if (inside(shape, x, y)) img.at(r, c) = shape.intensity;
        }
    }
    return img;
}

std::vector<std::string_view> phantom_presets() { return {"synthetic-ct", "disk"}; }

PhantomSpec preset_phantom(std::string_view name, std::size_t side) {
    PhantomSpec spec;
    spec.side = side;
    const double s = static_cast<double>(side);
    if (name == "disk") {
        spec.shapes.push_back({ShapeKind::disk, 0.5 * s, 0.5 * s, 0.25 * s, 0.0, 1.0});
        return spec;
    }
    if (name == "synthetic-ct") {
        require(side >= 16, "synthetic-ct preset needs side >= 16");
        // Soft-tissue body.
        spec.shapes.push_back({ShapeKind::disk, 0.5 * s, 0.5 * s, 0.42 * s, 0.0, 0.25});
        // Homogeneous masses.
        spec.shapes.push_back({ShapeKind::rect, 0.33 * s, 0.35 * s, 0.08 * s, 0.06 * s, 0.5});
        spec.shapes.push_back({ShapeKind::disk, 0.66 * s, 0.35 * s, 0.08 * s, 0.0, 0.6});
        spec.shapes.push_back({ShapeKind::ring, 0.36 * s, 0.65 * s, 0.09 * s, 0.05 * s, 0.7});
        // High-density insert.
        spec.shapes.push_back({ShapeKind::disk, 0.64 * s, 0.6 * s, 0.05 * s, 0.0, 1.0});
        // Thin cross: one pixel thick arms centred on a pixel.
        spec.shapes.push_back({ShapeKind::cross, centre_at(0.55, side), centre_at(0.8, side), 0.08 * s, 0.49, 0.8});
        return spec;
    }
    throw Error("unknown phantom preset '" + std::string(name) + "'");
}

std::vector<double> sample_noise(std::span<const double> clean, const NoiseSpec& noise) {
    require(noise.nu >= 0.0, "noise: nu must be >= 0");
    std::vector<double> e(clean.size(), 0.0);
    const double ny = norm2(clean);
    if (noise.nu == 0.0 || ny == 0.0) return e;
    Rng rng(noise.seed);
    for (auto& v : e) v = rng.normal();
    const double scale = noise.nu * ny / norm2(e);
    for (auto& v : e) v *= scale;
    return e;
}

SimulatedData simulate_sinogram(const Image& x_gt, const SparseOperator& K, std::size_t n_angles,
                                std::size_t n_detectors, const NoiseSpec& noise) {
    require(K.cols() == x_gt.size(), "simulate_sinogram: image size does not match projector columns");
    require(K.rows() == n_angles * n_detectors, "simulate_sinogram: projector rows do not match angles x detectors");
    std::vector<double> y = K.apply(x_gt.pixels);
    const std::vector<double> e = sample_noise(y, noise);
    SimulatedData out;
    out.zero_signal_warning = noise.nu > 0.0 && norm2(y) == 0.0;
    out.delta = noise.nu * norm2(y);
    std::vector<double> noisy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) noisy[i] = y[i] + e[i];
    out.clean = Sinogram(n_angles, n_detectors, std::move(y));
    out.noisy = Sinogram(n_angles, n_detectors, std::move(noisy));
    return out;
}

}  // namespace svtv
