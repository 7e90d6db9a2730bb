#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "svtv/sparse.hpp"

namespace svtv {

enum class BeamMode { parallel, fan };

BeamMode parse_beam_mode(std::string_view name);
std::string_view to_string(BeamMode m);

/// Acquisition geometry. The image is a square grid of unit pixels centred on the
/// rotation axis; detector positions are measured in the same length unit.
///
/// Parallel mode: the ray for angle t and detector offset s passes through
/// s * (cos t, sin t) with direction (-sin t, cos t). Fan mode: the source sits at
/// -source_origin_dist * (-sin t, cos t), a flat detector is centred at
/// (source_detector_dist - source_origin_dist) * (-sin t, cos t), and detector
/// cells are laid out along (cos t, sin t).
struct Geometry {
    BeamMode mode = BeamMode::parallel;
    std::vector<double> angles_deg;
    std::size_t n_detectors = 0;
    double detector_spacing = 1.0;
    double source_origin_dist = 0.0;
    double source_detector_dist = 0.0;
    std::size_t image_side = 0;

    /// n_angles equispaced angles k * range / n_angles, k = 0..n_angles-1.
    static Geometry parallel(std::size_t image_side, std::size_t n_angles, std::size_t n_detectors,
                             double angle_range_deg = 180.0, double detector_spacing = 1.0);
    static Geometry fan(std::size_t image_side, std::size_t n_angles, std::size_t n_detectors,
                        double source_origin_dist, double source_detector_dist, double angle_range_deg = 180.0,
                        double detector_spacing = 1.0);

    /// Detectors needed for a unit-spaced parallel beam to cover the grid diagonal.
    static std::size_t covering_detectors(std::size_t image_side);

    std::size_t n_angles() const noexcept { return angles_deg.size(); }
    std::size_t n_rays() const noexcept { return angles_deg.size() * n_detectors; }
    std::size_t n_pixels() const noexcept { return image_side * image_side; }

    /// Offset of detector cell d from the detector centre.
    double detector_offset(std::size_t d) const;

    /// Throws Error naming the violated invariant.
    void validate() const;
};

struct Point2 {
    double x;
    double y;
};

/// Ray segment from `start` to `end`; only the part inside the grid contributes.
struct RaySegment {
    Point2 start;
    Point2 end;
};

struct RayEntry {
    std::size_t pixel;
    double length;
};

/// Exact ray/pixel intersection lengths (Siddon) for a square grid of `side` unit
/// pixels centred on the origin. Pixel (r, c) covers x in [c - side/2, c + 1 - side/2]
/// and y in [side/2 - r - 1, side/2 - r]. Entries are sorted by pixel index.
std::vector<RayEntry> trace_ray(const RaySegment& ray, std::size_t side);

/// The geometric ray for (angle index, detector index).
RaySegment ray_for(const Geometry& geom, std::size_t angle_index, std::size_t detector_index);

/// System matrix K with one row per (angle, detector) ray in angle-major order.
/// Throws Error("empty projector") if no ray meets the grid.
SparseOperator build_projector(const Geometry& geom);

/// Projector built from arbitrary rays (one row per ray).
SparseOperator build_projector(const std::vector<RaySegment>& rays, std::size_t side);

}  // namespace svtv
