#pragma once

#include <cstddef>
#include <string>

#include "svtv/gradient.hpp"
#include "svtv/types.hpp"

namespace svtv {

constexpr double kPsnrCap = 100.0;

struct MetricsReport {
    double re = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    std::size_t n = 0;
    std::string notes;
};

/// ||x - gt||_2 / ||gt||_2; throws on a zero reference.
double relative_error(const Image& x, const Image& gt);

/// 10 log10(peak^2 / MSE), capped at 100 (returned exactly when MSE == 0).
double psnr(const Image& x, const Image& gt, double peak = 1.0);

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2, peak 1.
double ssim(const Image& x, const Image& gt);

/// alpha ||  |D gt| - |D x_tilde| ||_2^2 + (1 - alpha) || gt - x_tilde ||_2^2
double elastic_loss(const Image& x_tilde, const Image& gt, double alpha, Boundary boundary = Boundary::forward);

MetricsReport evaluate(const Image& x, const Image& gt);

// Table-style formatting: RE and SSIM with 4 decimals, PSNR with 2.
std::string format_re(double v);
std::string format_psnr(double v);
std::string format_ssim(double v);

}  // namespace svtv
