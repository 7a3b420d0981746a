#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "stargaze/error.hpp"

namespace stargaze {

/// Row-major dense matrix of doubles. The whole training stack works in
/// 64-bit precision so finite-difference gradient checks stay tight.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        DenseMatrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
        std::size_t r = 0;
        for (const auto& row : rows) {
            if (row.size() != m.cols_) throw Error("DenseMatrix::from_rows: ragged rows");
            std::size_t c = 0;
            for (double v : row) m(r, c++) = v;
            ++r;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void fill(double v) { data_.assign(data_.size(), v); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Sparse matrix in coordinate form. Used for the normalized adjacency and
/// the neighbor-mean aggregation operator; both are tiny relative to n^2.
struct SparseMatrix {
    struct Entry {
        std::uint32_t row;
        std::uint32_t col;
        double weight;
    };

    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Entry> entries;
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw Error("matmul: shape mismatch (" + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + ") * (" + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()) + ")");
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double av = arow[k];
            if (av == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

inline DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& h) {
    if (s.cols != h.rows()) throw Error("spmm: shape mismatch");
    DenseMatrix out(s.rows, h.cols());
    for (const auto& e : s.entries) {
        const double* src = h.row_ptr(e.col);
        double* dst = out.row_ptr(e.row);
        for (std::size_t j = 0; j < h.cols(); ++j) dst[j] += e.weight * src[j];
    }
    return out;
}

inline DenseMatrix to_dense(const SparseMatrix& s) {
    DenseMatrix out(s.rows, s.cols);
    for (const auto& e : s.entries) out(e.row, e.col) += e.weight;
    return out;
}

inline bool all_finite(const DenseMatrix& m) {
    for (double v : m.values())
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace stargaze
