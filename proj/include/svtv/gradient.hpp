#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "svtv/sparse.hpp"
#include "svtv/types.hpp"

namespace svtv {

/// Difference scheme for D. `forward`: x[i+1] - x[i] with replicate (Neumann)
/// boundary, so the last row/column derivative is 0. `central`: (x[i+1] - x[i-1]) / 2
/// with replicated edge samples.
enum class Boundary { forward, central };

Boundary parse_boundary(std::string_view name);
std::string_view to_string(Boundary b);

/// Discrete gradient D : R^n -> R^2n on a rows x cols grid.
class GradientOperator {
public:
    GradientOperator(std::size_t rows, std::size_t cols, Boundary boundary = Boundary::forward);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t pixels() const noexcept { return rows_ * cols_; }
    Boundary boundary() const noexcept { return boundary_; }

    /// out (length 2n) = D x
    void apply(std::span<const double> x, std::span<double> out) const;
    /// out (length n) = D^T g
    void adjoint(std::span<const double> g, std::span<double> out) const;

    GradientField apply(std::span<const double> x) const;

    /// Explicit CSR form of D (2n x n), for stacking into M = [K; D] and dense checks.
    SparseOperator to_sparse() const;

private:
    template <typename Visit>
    void for_each_entry(Visit&& visit) const;

    std::size_t rows_;
    std::size_t cols_;
    Boundary boundary_;
};

GradientField gradient(const Image& img, Boundary boundary = Boundary::forward);

/// Per-pixel sqrt(h_i^2 + v_i^2).
Image gradient_magnitude(const GradientField& g, std::size_t rows, std::size_t cols);
std::vector<double> gradient_magnitude(const GradientField& g);

/// Componentwise D x / |D x|, with both components 1/2 where |D x|_i == 0.
GradientField dhat(const Image& img, Boundary boundary = Boundary::forward);
GradientField dhat(const GradientField& g);

/// Isotropic (2,1)-norm: sum_i sqrt(h_i^2 + v_i^2). Equals TV(x) when g = D x.
double norm21(const GradientField& g);

}  // namespace svtv
