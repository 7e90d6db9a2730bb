#include "svtv/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svtv {

Image::Image(std::size_t r, std::size_t c, std::vector<double> data)
    : rows(r), cols(c), pixels(std::move(data)) {
    require(pixels.size() == rows * cols, "image data length does not match " + std::to_string(rows) + "x" +
                                              std::to_string(cols));
}

Sinogram::Sinogram(std::size_t a, std::size_t d, std::vector<double> data)
    : n_angles(a), n_detectors(d), values(std::move(data)) {
    require(values.size() == n_angles * n_detectors, "sinogram data length does not match angles x detectors");
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double norm1(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += std::abs(v);
    return s;
}

double norm_inf(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

double norm_p(std::span<const double> a, double p) {
    if (p == 1.0) return norm1(a);
    if (p == 2.0) return norm2(a);
    if (std::isinf(p)) return norm_inf(a);
    require(p >= 1.0, "norm_p: p must be >= 1");
    double s = 0.0;
    for (double v : a) s += std::pow(std::abs(v), p);
    return std::pow(s, 1.0 / p);
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "difference: length mismatch");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

void require(bool condition, const std::string& message) {
    if (!condition) throw Error(message);
}

}  // namespace svtv
