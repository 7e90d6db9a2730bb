#include "svtv/sparse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "svtv/types.hpp"

namespace svtv {

namespace {

constexpr char kCsrMagic[] = "SVTV-CSR1";
constexpr std::size_t kCsrMagicLen = 9;

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void write_pod(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& what) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw Error("truncated CSR file while reading " + what);
    return value;
}

}  // namespace

SparseOperator::SparseOperator(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                               std::vector<std::size_t> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    require(row_offsets_.size() == n_rows_ + 1, "CSR row_offsets must have rows+1 entries");
    require(row_offsets_.front() == 0, "CSR row_offsets must start at 0");
    require(col_indices_.size() == values_.size(), "CSR col_indices and values differ in length");
    require(row_offsets_.back() == values_.size(), "CSR row_offsets must end at nnz");
    for (std::size_t r = 0; r < n_rows_; ++r)
        require(row_offsets_[r] <= row_offsets_[r + 1], "CSR row_offsets must be nondecreasing");
    for (std::size_t k = 0; k < col_indices_.size(); ++k) {
        require(col_indices_[k] < n_cols_, "CSR column index out of range");
        require(std::isfinite(values_[k]), "CSR values must be finite");
    }
}

SparseOperator SparseOperator::from_triplets(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(n_rows + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const auto& t = triplets[k];
        require(t.row < n_rows && t.col < n_cols, "triplet index out of range");
        if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
            vals.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        vals.push_back(t.value);
        ++offsets[t.row + 1];
    }
    for (std::size_t r = 0; r < n_rows; ++r) offsets[r + 1] += offsets[r];
    return SparseOperator(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseOperator SparseOperator::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<std::size_t> cols(n);
    for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
    for (std::size_t i = 0; i < n; ++i) cols[i] = i;
    return SparseOperator(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

SparseOperator SparseOperator::from_dense(std::size_t n_rows, std::size_t n_cols, std::span<const double> row_major) {
    require(row_major.size() == n_rows * n_cols, "from_dense: size mismatch");
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < n_rows; ++r)
        for (std::size_t c = 0; c < n_cols; ++c)
            if (row_major[r * n_cols + c] != 0.0) t.push_back({r, c, row_major[r * n_cols + c]});
    return from_triplets(n_rows, n_cols, std::move(t));
}

std::vector<double> SparseOperator::apply(std::span<const double> v, ApplyMode mode) const {
    std::vector<double> out(mode == ApplyMode::forward ? n_rows_ : n_cols_);
    apply_into(v, out, mode);
    return out;
}

void SparseOperator::apply_into(std::span<const double> v, std::span<double> out, ApplyMode mode) const {
    if (mode == ApplyMode::forward) {
        require(v.size() == n_cols_ && out.size() == n_rows_,
                "forward apply: expected input length " + std::to_string(n_cols_) + ", got " +
                    std::to_string(v.size()));
        for (std::size_t r = 0; r < n_rows_; ++r) {
            double s = 0.0;
            for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) s += values_[k] * v[col_indices_[k]];
            out[r] = s;
        }
    } else {
        require(v.size() == n_rows_ && out.size() == n_cols_,
                "adjoint apply: expected input length " + std::to_string(n_rows_) + ", got " +
                    std::to_string(v.size()));
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t r = 0; r < n_rows_; ++r) {
            const double vr = v[r];
            if (vr == 0.0) continue;
            for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) out[col_indices_[k]] += values_[k] * vr;
        }
    }
}

double SparseOperator::frobenius_norm() const { return norm2(values_); }

std::vector<double> SparseOperator::to_dense() const {
    std::vector<double> dense(n_rows_ * n_cols_, 0.0);
    for (std::size_t r = 0; r < n_rows_; ++r)
        for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            dense[r * n_cols_ + col_indices_[k]] += values_[k];
    return dense;
}

std::vector<double> apply(const SparseOperator& op, std::span<const double> v, ApplyMode mode) {
    return op.apply(v, mode);
}

SparseOperator stack(const SparseOperator& top, const SparseOperator& bottom) {
    require(top.cols() == bottom.cols(), "stack: column counts differ");
    std::vector<std::size_t> offsets = top.row_offsets();
    const std::size_t base = top.nnz();
    for (std::size_t r = 1; r < bottom.row_offsets().size(); ++r) offsets.push_back(base + bottom.row_offsets()[r]);
    std::vector<std::size_t> cols = top.col_indices();
    cols.insert(cols.end(), bottom.col_indices().begin(), bottom.col_indices().end());
    std::vector<double> vals = top.values();
    vals.insert(vals.end(), bottom.values().begin(), bottom.values().end());
    return SparseOperator(top.rows() + bottom.rows(), top.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

void save_csr(const SparseOperator& op, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(kCsrMagic, kCsrMagicLen);
    write_pod<std::uint64_t>(out, op.rows());
    write_pod<std::uint64_t>(out, op.cols());
    write_pod<std::uint64_t>(out, op.nnz());
    for (auto v : op.row_offsets()) write_pod<std::uint64_t>(out, v);
    for (auto v : op.col_indices()) write_pod<std::uint64_t>(out, v);
    for (auto v : op.values()) write_pod<double>(out, v);
    if (!out) throw Error("failed writing " + path.string());
}

SparseOperator load_csr(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    char magic[kCsrMagicLen];
    in.read(magic, kCsrMagicLen);
    if (!in || std::memcmp(magic, kCsrMagic, kCsrMagicLen) != 0) throw Error("bad CSR magic in " + path.string());
    const auto rows = read_pod<std::uint64_t>(in, "rows");
    const auto cols = read_pod<std::uint64_t>(in, "cols");
    const auto nnz = read_pod<std::uint64_t>(in, "nnz");
    const auto remaining = [&] {
        const auto here = in.tellg();
        in.seekg(0, std::ios::end);
        const auto end = in.tellg();
        in.seekg(here);
        return static_cast<std::uint64_t>(end - here);
    }();
    if (remaining != 8 * (rows + 1 + 2 * nnz)) throw Error("CSR payload size mismatch in " + path.string());
    std::vector<std::size_t> offsets(rows + 1), indices(nnz);
    std::vector<double> values(nnz);
    for (auto& v : offsets) v = read_pod<std::uint64_t>(in, "row_offsets");
    for (auto& v : indices) v = read_pod<std::uint64_t>(in, "col_indices");
    for (auto& v : values) v = read_pod<double>(in, "values");
    return SparseOperator(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

}  // namespace svtv
