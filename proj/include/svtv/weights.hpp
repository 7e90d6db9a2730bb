#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "svtv/gradient.hpp"
#include "svtv/types.hpp"

namespace svtv {

struct WeightParams {
    double eta = 2e-5;
    double p_exp = 0.5;  ///< TpV exponent p in (0, 1)

    void validate() const;
};

struct WeightMap {
    std::vector<double> w;
    WeightParams params;
    std::string source;  ///< "gt" or a reconstructor id
};

/// Weight of a single gradient magnitude: (eta / sqrt(eta^2 + a^2))^(1 - p).
double weight_value(double magnitude, const WeightParams& params);

/// w_i = (eta / sqrt(eta^2 + |D x|_i^2))^(1 - p). Frozen for the whole solve.
WeightMap compute_weights(const Image& x_tilde, const WeightParams& params, Boundary boundary = Boundary::forward,
                          std::string source = "");
/// Same map from precomputed gradient magnitudes.
std::vector<double> weights_from_magnitude(std::span<const double> magnitude, const WeightParams& params);

/// Derivative of the magnitude-to-weight map at a >= 0.
double weight_derivative(double magnitude, const WeightParams& params);

/// max |f'| over {0} and `grid_points` log-spaced magnitudes in [1e-3 eta, grid_max],
/// inflated by 1%.
double weight_lipschitz_constant(const WeightParams& params, double grid_max, std::size_t grid_points = 10000);

}  // namespace svtv
