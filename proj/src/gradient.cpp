#include "svtv/gradient.hpp"

#include <algorithm>
#include <cmath>

namespace svtv {

Boundary parse_boundary(std::string_view name) {
    if (name == "forward") return Boundary::forward;
    if (name == "central") return Boundary::central;
    throw Error("unknown gradient boundary '" + std::string(name) + "' (expected forward|central)");
}

std::string_view to_string(Boundary b) { return b == Boundary::forward ? "forward" : "central"; }

GradientOperator::GradientOperator(std::size_t rows, std::size_t cols, Boundary boundary)
    : rows_(rows), cols_(cols), boundary_(boundary) {
    require(rows >= 1 && cols >= 1, "gradient grid must be at least 1x1");
}

// Enumerates the nonzeros of D as visit(row_of_D, pixel, coefficient). Both apply
// and adjoint, and the CSR export, go through this single stencil definition.
template <typename Visit>
void GradientOperator::for_each_entry(Visit&& visit) const {
    const std::size_t n = pixels();
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            const std::size_t i = r * cols_ + c;
            if (boundary_ == Boundary::forward) {
                if (c + 1 < cols_) {
                    visit(i, i + 1, 1.0);
                    visit(i, i, -1.0);
                }
                if (r + 1 < rows_) {
                    visit(n + i, i + cols_, 1.0);
                    visit(n + i, i, -1.0);
                }
            } else {
                const std::size_t cl = c == 0 ? c : c - 1;
                const std::size_t cr = std::min(c + 1, cols_ - 1);
                if (cl != cr) {
                    visit(i, r * cols_ + cr, 0.5);
                    visit(i, r * cols_ + cl, -0.5);
                }
                const std::size_t ru = r == 0 ? r : r - 1;
                const std::size_t rd = std::min(r + 1, rows_ - 1);
                if (ru != rd) {
                    visit(n + i, rd * cols_ + c, 0.5);
                    visit(n + i, ru * cols_ + c, -0.5);
                }
            }
        }
    }
}

void GradientOperator::apply(std::span<const double> x, std::span<double> out) const {
    require(x.size() == pixels(), "gradient: image length does not match grid");
    require(out.size() == 2 * pixels(), "gradient: output length must be 2n");
    std::fill(out.begin(), out.end(), 0.0);
    for_each_entry([&](std::size_t row, std::size_t col, double coef) { out[row] += coef * x[col]; });
}

void GradientOperator::adjoint(std::span<const double> g, std::span<double> out) const {
    require(g.size() == 2 * pixels(), "gradient adjoint: field length must be 2n");
    require(out.size() == pixels(), "gradient adjoint: output length must be n");
    std::fill(out.begin(), out.end(), 0.0);
    for_each_entry([&](std::size_t row, std::size_t col, double coef) { out[col] += coef * g[row]; });
}

GradientField GradientOperator::apply(std::span<const double> x) const {
    GradientField g(pixels());
    apply(x, g.data);
    return g;
}

SparseOperator GradientOperator::to_sparse() const {
    std::vector<Triplet> t;
    t.reserve(4 * pixels());
    for_each_entry([&](std::size_t row, std::size_t col, double coef) { t.push_back({row, col, coef}); });
    return SparseOperator::from_triplets(2 * pixels(), pixels(), std::move(t));
}

GradientField gradient(const Image& img, Boundary boundary) {
    return GradientOperator(img.rows, img.cols, boundary).apply(img.pixels);
}

std::vector<double> gradient_magnitude(const GradientField& g) {
    std::vector<double> mag(g.n);
    for (std::size_t i = 0; i < g.n; ++i) mag[i] = std::sqrt(g.h(i) * g.h(i) + g.v(i) * g.v(i));
    return mag;
}

Image gradient_magnitude(const GradientField& g, std::size_t rows, std::size_t cols) {
    require(rows * cols == g.n, "gradient_magnitude: grid does not match field");
    return Image(rows, cols, gradient_magnitude(g));
}

GradientField dhat(const GradientField& g) {
    GradientField out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double mag = std::sqrt(g.h(i) * g.h(i) + g.v(i) * g.v(i));
        if (mag != 0.0) {
            out.h(i) = g.h(i) / mag;
            out.v(i) = g.v(i) / mag;
        } else {
            out.h(i) = 0.5;
            out.v(i) = 0.5;
        }
    }
    return out;
}

GradientField dhat(const Image& img, Boundary boundary) { return dhat(gradient(img, boundary)); }

double norm21(const GradientField& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) s += std::sqrt(g.h(i) * g.h(i) + g.v(i) * g.v(i));
    return s;
}

}  // namespace svtv
