#include "svtv/weights.hpp"

#include <cmath>

namespace svtv {

void WeightParams::validate() const {
    require(std::isfinite(eta) && eta > 0.0, "weights: eta must be > 0");
    require(p_exp > 0.0 && p_exp < 1.0, "weights: p must lie in (0, 1)");
}

double weight_value(double magnitude, const WeightParams& params) {
    // hypot avoids overflow for huge magnitudes; at magnitude 0 this is (eta/eta)^(1-p) = 1 exactly.
    return std::pow(params.eta / std::hypot(params.eta, magnitude), 1.0 - params.p_exp);
}

std::vector<double> weights_from_magnitude(std::span<const double> magnitude, const WeightParams& params) {
    params.validate();
    std::vector<double> w(magnitude.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight_value(magnitude[i], params);
    return w;
}

WeightMap compute_weights(const Image& x_tilde, const WeightParams& params, Boundary boundary, std::string source) {
    const auto mag = gradient_magnitude(gradient(x_tilde, boundary));
    return {weights_from_magnitude(mag, params), params, std::move(source)};
}

double weight_derivative(double magnitude, const WeightParams& params) {
    const double s = std::hypot(params.eta, magnitude);
    return (params.p_exp - 1.0) * std::pow(params.eta / s, 1.0 - params.p_exp) * magnitude / (s * s);
}

double weight_lipschitz_constant(const WeightParams& params, double grid_max, std::size_t grid_points) {
    params.validate();
    require(grid_points >= 2, "weight Lipschitz grid needs at least 2 points");
    const double lo = 1e-3 * params.eta;
    require(grid_max > lo, "weight Lipschitz grid_max must exceed 1e-3 * eta");
    double best = std::abs(weight_derivative(0.0, params));
    const double step = std::log(grid_max / lo) / static_cast<double>(grid_points - 1);
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double a = lo * std::exp(step * static_cast<double>(k));
        best = std::max(best, std::abs(weight_derivative(a, params)));
    }
    return 1.01 * best;
}

}  // namespace svtv
