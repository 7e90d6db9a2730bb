#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svtv {

/// Library-wide error type. Messages name the offending quantity.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major h x w raster. Pixel (r, c) lives at index r * cols + c, row 0 at the top.
struct Image {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), pixels(r * c, fill) {}
    Image(std::size_t r, std::size_t c, std::vector<double> data);

    std::size_t size() const noexcept { return pixels.size(); }
    double& at(std::size_t r, std::size_t c) { return pixels[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return pixels[r * cols + c]; }
    std::span<const double> view() const noexcept { return pixels; }
    std::span<double> view() noexcept { return pixels; }

    bool operator==(const Image&) const = default;
};

/// Measurement vector laid out angle-major: value(a, d) at a * n_detectors + d.
struct Sinogram {
    std::size_t n_angles = 0;
    std::size_t n_detectors = 0;
    std::vector<double> values;

    Sinogram() = default;
    Sinogram(std::size_t a, std::size_t d, std::vector<double> data);

    std::size_t size() const noexcept { return values.size(); }
    std::span<const double> view() const noexcept { return values; }
    std::span<double> view() noexcept { return values; }

    bool operator==(const Sinogram&) const = default;
};

/// Stacked gradient [horizontal block; vertical block], each of length n.
struct GradientField {
    std::size_t n = 0;
    std::vector<double> data;

    GradientField() = default;
    explicit GradientField(std::size_t pixels) : n(pixels), data(2 * pixels, 0.0) {}

    double& h(std::size_t i) { return data[i]; }
    double h(std::size_t i) const { return data[i]; }
    double& v(std::size_t i) { return data[n + i]; }
    double v(std::size_t i) const { return data[n + i]; }
};

// Small vector helpers shared by the modules.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);
double norm_inf(std::span<const double> a);
double norm_p(std::span<const double> a, double p);
std::vector<double> difference(std::span<const double> a, std::span<const double> b);

void require(bool condition, const std::string& message);

}  // namespace svtv
