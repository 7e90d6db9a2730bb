#pragma once

#include <cstddef>
#include <cstdint>

#include "svtv/sparse.hpp"

namespace svtv {

struct NormEstimate {
    double value = 0.0;       ///< estimate of the spectral norm ||op||_2
    std::size_t iterations = 0;
    bool converged = false;   ///< false: max_iter hit, `value` is the best estimate so far
};

/// Spectral norm via power iteration on op^T op, started from a seeded random vector.
/// Stops when successive estimates differ by less than `tol` relative.
NormEstimate power_method_norm(const SparseOperator& op, std::size_t max_iter = 5000, double tol = 1e-10,
                               std::uint64_t seed = 1);

}  // namespace svtv
