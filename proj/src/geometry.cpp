#include "svtv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "svtv/types.hpp"

namespace svtv {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Parameters of the plane crossings x = const (or y = const) in (t_lo, t_hi).
void plane_crossings(double start, double delta, double lo_plane, std::size_t side, double t_lo, double t_hi,
                     std::vector<double>& out) {
    if (delta == 0.0) return;
    for (std::size_t k = 0; k <= side; ++k) {
        const double t = (lo_plane + static_cast<double>(k) - start) / delta;
        if (t > t_lo && t < t_hi) out.push_back(t);
    }
}

}  // namespace

BeamMode parse_beam_mode(std::string_view name) {
    if (name == "parallel") return BeamMode::parallel;
    if (name == "fan") return BeamMode::fan;
    throw Error("unknown geometry mode '" + std::string(name) + "' (expected parallel|fan)");
}

std::string_view to_string(BeamMode m) { return m == BeamMode::parallel ? "parallel" : "fan"; }

Geometry Geometry::parallel(std::size_t image_side, std::size_t n_angles, std::size_t n_detectors,
                            double angle_range_deg, double detector_spacing) {
    Geometry g;
    g.mode = BeamMode::parallel;
    g.image_side = image_side;
    g.n_detectors = n_detectors;
    g.detector_spacing = detector_spacing;
    for (std::size_t k = 0; k < n_angles; ++k)
        g.angles_deg.push_back(angle_range_deg * static_cast<double>(k) / static_cast<double>(n_angles));
    g.validate();
    return g;
}

Geometry Geometry::fan(std::size_t image_side, std::size_t n_angles, std::size_t n_detectors,
                       double source_origin_dist, double source_detector_dist, double angle_range_deg,
                       double detector_spacing) {
    Geometry g = parallel(image_side, n_angles, n_detectors, angle_range_deg, detector_spacing);
    g.mode = BeamMode::fan;
    g.source_origin_dist = source_origin_dist;
    g.source_detector_dist = source_detector_dist;
    g.validate();
    return g;
}

std::size_t Geometry::covering_detectors(std::size_t image_side) {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(image_side) * std::numbers::sqrt2)) + 1;
}

double Geometry::detector_offset(std::size_t d) const {
    return (static_cast<double>(d) - 0.5 * static_cast<double>(n_detectors - 1)) * detector_spacing;
}

void Geometry::validate() const {
    require(image_side >= 1, "geometry: image_side must be >= 1");
    require(n_detectors >= 1, "geometry: n_detectors must be >= 1");
    require(!angles_deg.empty(), "geometry: at least one angle is required");
    require(detector_spacing > 0.0, "geometry: detector_spacing must be > 0");
    for (std::size_t k = 0; k < angles_deg.size(); ++k) {
        require(angles_deg[k] >= 0.0 && angles_deg[k] < 180.0, "geometry: angles must lie in [0, 180)");
        if (k > 0) require(angles_deg[k] > angles_deg[k - 1], "geometry: angles must be strictly increasing");
    }
    if (mode == BeamMode::fan) {
        require(source_origin_dist > 0.0, "geometry: source_origin_dist must be > 0 in fan mode");
        require(source_detector_dist > 0.0, "geometry: source_detector_dist must be > 0 in fan mode");
        require(source_origin_dist > 0.5 * std::numbers::sqrt2 * static_cast<double>(image_side),
                "geometry: fan source must lie outside the image");
    }
}

RaySegment ray_for(const Geometry& geom, std::size_t angle_index, std::size_t detector_index) {
    const double theta = geom.angles_deg.at(angle_index) * kDeg;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double offset = geom.detector_offset(detector_index);
    // Beam direction n = (-sin t, cos t), detector axis u = (cos t, sin t).
    if (geom.mode == BeamMode::parallel) {
        const double reach = static_cast<double>(geom.image_side) + 1.0;
        const Point2 centre{offset * c, offset * s};
        return {{centre.x + reach * s, centre.y - reach * c}, {centre.x - reach * s, centre.y + reach * c}};
    }
    const double back = geom.source_origin_dist;
    const double front = geom.source_detector_dist - geom.source_origin_dist;
    const Point2 source{back * s, -back * c};
    const Point2 cell{-front * s + offset * c, front * c + offset * s};
    return {source, cell};
}

std::vector<RayEntry> trace_ray(const RaySegment& ray, std::size_t side) {
    const double half = 0.5 * static_cast<double>(side);
    const double dx = ray.end.x - ray.start.x;
    const double dy = ray.end.y - ray.start.y;
    const double seg_len = std::hypot(dx, dy);
    if (seg_len == 0.0) return {};

    // Clip the segment (t in [0, 1]) to the box [-half, half]^2.
    double t_lo = 0.0;
    double t_hi = 1.0;
    auto clip = [&](double start, double delta) {
        if (delta == 0.0) return start >= -half && start < half;
        double a = (-half - start) / delta;
        double b = (half - start) / delta;
        if (a > b) std::swap(a, b);
        t_lo = std::max(t_lo, a);
        t_hi = std::min(t_hi, b);
        return true;
    };
    if (!clip(ray.start.x, dx) || !clip(ray.start.y, dy) || t_hi <= t_lo) return {};

    std::vector<double> ts{t_lo, t_hi};
    plane_crossings(ray.start.x, dx, -half, side, t_lo, t_hi, ts);
    plane_crossings(ray.start.y, dy, -half, side, t_lo, t_hi, ts);
    std::sort(ts.begin(), ts.end());

    std::vector<RayEntry> entries;
    entries.reserve(ts.size());
    const auto last = static_cast<double>(side - 1);
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double dt = ts[k + 1] - ts[k];
        if (dt <= 0.0) continue;
        const double tm = 0.5 * (ts[k] + ts[k + 1]);
        const double xm = ray.start.x + tm * dx;
        const double ym = ray.start.y + tm * dy;
        const double col = std::clamp(std::floor(xm + half), 0.0, last);
        const double row = std::clamp(std::floor(half - ym), 0.0, last);
        entries.push_back({static_cast<std::size_t>(row) * side + static_cast<std::size_t>(col), dt * seg_len});
    }
    std::sort(entries.begin(), entries.end(), [](const RayEntry& a, const RayEntry& b) { return a.pixel < b.pixel; });
    // Merge segments that landed in the same pixel (only possible at exact corner hits).
    std::vector<RayEntry> merged;
    for (const auto& e : entries) {
        if (!merged.empty() && merged.back().pixel == e.pixel)
            merged.back().length += e.length;
        else
            merged.push_back(e);
    }
    return merged;
}

SparseOperator build_projector(const std::vector<RaySegment>& rays, std::size_t side) {
    require(side >= 1, "projector: image side must be >= 1");
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    for (const auto& ray : rays) {
        for (const auto& e : trace_ray(ray, side)) {
            cols.push_back(e.pixel);
            vals.push_back(e.length);
        }
        offsets.push_back(cols.size());
    }
    if (cols.empty()) throw Error("empty projector");
    return SparseOperator(rays.size(), side * side, std::move(offsets), std::move(cols), std::move(vals));
}

SparseOperator build_projector(const Geometry& geom) {
    geom.validate();
    std::vector<RaySegment> rays;
    rays.reserve(geom.n_rays());
    for (std::size_t a = 0; a < geom.n_angles(); ++a)
        for (std::size_t d = 0; d < geom.n_detectors; ++d) rays.push_back(ray_for(geom, a, d));
    return build_projector(rays, geom.image_side);
}

}  // namespace svtv
