#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace svtv {

enum class ApplyMode { forward, adjoint };

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Immutable after construction; all products are pure.
class SparseOperator {
public:
    SparseOperator() = default;

    /// Takes ownership of raw CSR arrays after validating them.
    SparseOperator(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                   std::vector<std::size_t> col_indices, std::vector<double> values);

    /// Duplicate (row, col) entries are summed; entries are sorted by column within each row.
    static SparseOperator from_triplets(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> triplets);
    static SparseOperator identity(std::size_t n);
    static SparseOperator from_dense(std::size_t n_rows, std::size_t n_cols, std::span<const double> row_major);

    std::size_t rows() const noexcept { return n_rows_; }
    std::size_t cols() const noexcept { return n_cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
    const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::vector<double> apply(std::span<const double> v, ApplyMode mode = ApplyMode::forward) const;

    /// out = A v (forward) or A^T v (adjoint); `out` is overwritten.
    void apply_into(std::span<const double> v, std::span<double> out, ApplyMode mode = ApplyMode::forward) const;

    double frobenius_norm() const;
    std::vector<double> to_dense() const;  // row-major

    bool operator==(const SparseOperator&) const = default;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

std::vector<double> apply(const SparseOperator& op, std::span<const double> v, ApplyMode mode);

/// Row-wise concatenation [top; bottom]; column counts must agree.
SparseOperator stack(const SparseOperator& top, const SparseOperator& bottom);

// Binary cache: magic "SVTV-CSR1", u64 rows, cols, nnz (little-endian), then
// row_offsets (u64), col_indices (u64), values (f64).
void save_csr(const SparseOperator& op, const std::filesystem::path& path);
SparseOperator load_csr(const std::filesystem::path& path);

}  // namespace svtv
