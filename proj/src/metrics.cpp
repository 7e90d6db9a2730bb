#include "svtv/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace svtv {

namespace {

constexpr std::size_t kWindow = 11;

std::array<double, kWindow> gaussian_taps() {
    std::array<double, kWindow> g{};
    double sum = 0.0;
    for (std::size_t i = 0; i < kWindow; ++i) {
        const double d = static_cast<double>(i) - 5.0;
        g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += g[i];
    }
    for (auto& v : g) v /= sum;
    return g;
}

// Separable Gaussian filter restricted to the valid region: output is
// (rows - 10) x (cols - 10).
std::vector<double> filter_valid(const std::vector<double>& in, std::size_t rows, std::size_t cols) {
    static const auto taps = gaussian_taps();
    const std::size_t orows = rows - kWindow + 1;
    const std::size_t ocols = cols - kWindow + 1;
    std::vector<double> tmp(rows * ocols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < ocols; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < kWindow; ++k) s += taps[k] * in[r * cols + c + k];
            tmp[r * ocols + c] = s;
        }
    std::vector<double> out(orows * ocols);
    for (std::size_t r = 0; r < orows; ++r)
        for (std::size_t c = 0; c < ocols; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < kWindow; ++k) s += taps[k] * tmp[(r + k) * ocols + c];
            out[r * ocols + c] = s;
        }
    return out;
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
    require(a.rows == b.rows && a.cols == b.cols, std::string(what) + ": image shapes differ");
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

double relative_error(const Image& x, const Image& gt) {
    require_same_shape(x, gt, "relative_error");
    const double ng = norm2(gt.pixels);
    require(ng > 0.0, "relative_error: reference image has zero norm");
    return norm2(difference(x.pixels, gt.pixels)) / ng;
}

double psnr(const Image& x, const Image& gt, double peak) {
    require_same_shape(x, gt, "psnr");
    require(x.size() > 0, "psnr: empty image");
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.pixels[i] - gt.pixels[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(x.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Image& x, const Image& gt) {
    require_same_shape(x, gt, "ssim");
    require(x.rows >= kWindow && x.cols >= kWindow, "ssim: image smaller than the 11x11 window");
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    const std::size_t n = x.size();
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = x.pixels[i] * x.pixels[i];
        yy[i] = gt.pixels[i] * gt.pixels[i];
        xy[i] = x.pixels[i] * gt.pixels[i];
    }
    const auto mx = filter_valid(x.pixels, x.rows, x.cols);
    const auto my = filter_valid(gt.pixels, x.rows, x.cols);
    const auto sxx = filter_valid(xx, x.rows, x.cols);
    const auto syy = filter_valid(yy, x.rows, x.cols);
    const auto sxy = filter_valid(xy, x.rows, x.cols);
    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cov = sxy[i] - mx[i] * my[i];
        const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
        const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
        total += num / den;
    }
    return total / static_cast<double>(mx.size());
}

double elastic_loss(const Image& x_tilde, const Image& gt, double alpha, Boundary boundary) {
    require_same_shape(x_tilde, gt, "elastic_loss");
    require(alpha >= 0.0 && alpha <= 1.0, "elastic_loss: alpha must lie in [0, 1]");
    const auto mg = gradient_magnitude(gradient(gt, boundary));
    const auto mx = gradient_magnitude(gradient(x_tilde, boundary));
    const double grad_term = std::pow(norm2(difference(mg, mx)), 2);
    const double img_term = std::pow(norm2(difference(gt.pixels, x_tilde.pixels)), 2);
    return alpha * grad_term + (1.0 - alpha) * img_term;
}

MetricsReport evaluate(const Image& x, const Image& gt) {
    MetricsReport r;
    r.re = relative_error(x, gt);
    r.psnr = psnr(x, gt);
    r.ssim = ssim(x, gt);
    r.n = x.size();
    return r;
}

std::string format_re(double v) { return fixed(v, 4); }
std::string format_psnr(double v) { return fixed(v, 2); }
std::string format_ssim(double v) { return fixed(v, 4); }

}  // namespace svtv
