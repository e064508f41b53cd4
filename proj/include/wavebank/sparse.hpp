#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace wavebank {

using Mat = Eigen::MatrixXd;

// Square-ish sparse matrix in CSR form. Column indices within a row are
// strictly increasing; no explicit zeros survive normalize/sparsify.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_offsets;  // length n_rows + 1
    std::vector<std::size_t> col_indices;
    std::vector<double> values;

    SparseMatrix() : row_offsets(1, 0) {}
    SparseMatrix(std::size_t rows, std::size_t cols)
        : n_rows(rows), n_cols(cols), row_offsets(rows + 1, 0) {}

    std::size_t nnz() const { return values.size(); }

    double density() const {
        if (n_rows == 0 || n_cols == 0) return 0.0;
        return static_cast<double>(nnz()) /
               (static_cast<double>(n_rows) * static_cast<double>(n_cols));
    }

    // O(log row-nnz) lookup; absent entries read as 0.
    double at(std::size_t i, std::size_t j) const {
        auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
        auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
        auto it = std::lower_bound(begin, end, j);
        if (it == end || *it != j) return 0.0;
        return values[static_cast<std::size_t>(it - col_indices.begin())];
    }

    Mat to_dense() const {
        Mat d = Mat::Zero(static_cast<Eigen::Index>(n_rows),
                          static_cast<Eigen::Index>(n_cols));
        for (std::size_t i = 0; i < n_rows; ++i)
            for (std::size_t p = row_offsets[i]; p < row_offsets[i + 1]; ++p)
                d(static_cast<Eigen::Index>(i),
                  static_cast<Eigen::Index>(col_indices[p])) = values[p];
        return d;
    }
};

namespace detail {

struct Triplet {
    std::size_t row, col;
    double value;
};

// Sorts, merges duplicates by summation, drops exact zeros.
inline SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                  std::vector<Triplet> trips) {
    std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(rows, cols);
    std::size_t k = 0;
    while (k < trips.size()) {
        std::size_t r = trips[k].row, c = trips[k].col;
        double v = 0.0;
        while (k < trips.size() && trips[k].row == r && trips[k].col == c)
            v += trips[k++].value;
        if (v != 0.0) {
            m.col_indices.push_back(c);
            m.values.push_back(v);
            ++m.row_offsets[r + 1];
        }
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_offsets[i + 1] += m.row_offsets[i];
    return m;
}

}  // namespace detail

inline SparseMatrix sparse_identity(std::size_t n) {
    SparseMatrix m(n, n);
    m.col_indices.resize(n);
    m.values.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.col_indices[i] = i;
        m.row_offsets[i + 1] = i + 1;
    }
    return m;
}

inline SparseMatrix from_dense(const Mat& d, double tol = 0.0) {
    std::vector<detail::Triplet> trips;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j)
            if (std::abs(d(i, j)) > tol)
                trips.push_back({static_cast<std::size_t>(i),
                                 static_cast<std::size_t>(j), d(i, j)});
    return detail::from_triplets(static_cast<std::size_t>(d.rows()),
                                 static_cast<std::size_t>(d.cols()), std::move(trips));
}

// a*A + b*B with pruning of exact cancellations.
inline SparseMatrix sparse_add(const SparseMatrix& a, const SparseMatrix& b,
                               double ca = 1.0, double cb = 1.0) {
    if (a.n_rows != b.n_rows || a.n_cols != b.n_cols)
        throw std::invalid_argument("sparse_add: shape mismatch");
    SparseMatrix out(a.n_rows, a.n_cols);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        std::size_t pa = a.row_offsets[i], ea = a.row_offsets[i + 1];
        std::size_t pb = b.row_offsets[i], eb = b.row_offsets[i + 1];
        while (pa < ea || pb < eb) {
            std::size_t col;
            double v = 0.0;
            if (pa < ea && (pb >= eb || a.col_indices[pa] <= b.col_indices[pb])) {
                col = a.col_indices[pa];
                v += ca * a.values[pa++];
                if (pb < eb && b.col_indices[pb] == col) v += cb * b.values[pb++];
            } else {
                col = b.col_indices[pb];
                v += cb * b.values[pb++];
            }
            if (v != 0.0) {
                out.col_indices.push_back(col);
                out.values.push_back(v);
                ++out.row_offsets[i + 1];
            }
        }
    }
    for (std::size_t i = 0; i < a.n_rows; ++i) out.row_offsets[i + 1] += out.row_offsets[i];
    return out;
}

// Exact sparse-sparse product; entries below 1e-15 in magnitude are pruned.
inline SparseMatrix sparse_matmul(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.n_cols != b.n_rows)
        throw std::invalid_argument("sparse_matmul: inner dimensions mismatch");
    constexpr double kPrune = 1e-15;
    SparseMatrix out(a.n_rows, b.n_cols);
    std::vector<double> acc(b.n_cols, 0.0);
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        touched.clear();
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
            std::size_t k = a.col_indices[p];
            double av = a.values[p];
            for (std::size_t q = b.row_offsets[k]; q < b.row_offsets[k + 1]; ++q) {
                std::size_t j = b.col_indices[q];
                if (acc[j] == 0.0) touched.push_back(j);
                acc[j] += av * b.values[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::size_t j : touched) {
            if (std::abs(acc[j]) >= kPrune) {
                out.col_indices.push_back(j);
                out.values.push_back(acc[j]);
                ++out.row_offsets[i + 1];
            }
            acc[j] = 0.0;
        }
    }
    for (std::size_t i = 0; i < a.n_rows; ++i) out.row_offsets[i + 1] += out.row_offsets[i];
    return out;
}

// Sparse-dense product S * D.
inline Mat spmm(const SparseMatrix& s, const Mat& d) {
    if (s.n_cols != static_cast<std::size_t>(d.rows()))
        throw std::invalid_argument("spmm: shape mismatch");
    Mat out = Mat::Zero(static_cast<Eigen::Index>(s.n_rows), d.cols());
    for (std::size_t i = 0; i < s.n_rows; ++i)
        for (std::size_t p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p)
            out.row(static_cast<Eigen::Index>(i)) +=
                s.values[p] * d.row(static_cast<Eigen::Index>(s.col_indices[p]));
    return out;
}

// Sᵀ * D, used by the backward pass of constant-operator propagation.
inline Mat spmm_transpose(const SparseMatrix& s, const Mat& d) {
    if (s.n_rows != static_cast<std::size_t>(d.rows()))
        throw std::invalid_argument("spmm_transpose: shape mismatch");
    Mat out = Mat::Zero(static_cast<Eigen::Index>(s.n_cols), d.cols());
    for (std::size_t i = 0; i < s.n_rows; ++i)
        for (std::size_t p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p)
            out.row(static_cast<Eigen::Index>(s.col_indices[p])) +=
                s.values[p] * d.row(static_cast<Eigen::Index>(i));
    return out;
}

// Divides each column by its sum; a zero column (isolated node) becomes the
// unit coordinate column so the result stays column-stochastic.
inline SparseMatrix column_normalize(const SparseMatrix& s) {
    if (s.n_rows != s.n_cols)
        throw std::invalid_argument("column_normalize: matrix must be square");
    std::vector<double> colsum(s.n_cols, 0.0);
    for (std::size_t p = 0; p < s.values.size(); ++p) {
        if (s.values[p] < 0.0)
            throw std::domain_error("column_normalize: negative entry");
        colsum[s.col_indices[p]] += s.values[p];
    }
    std::vector<detail::Triplet> trips;
    trips.reserve(s.nnz());
    for (std::size_t i = 0; i < s.n_rows; ++i)
        for (std::size_t p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p) {
            std::size_t j = s.col_indices[p];
            if (colsum[j] > 0.0 && s.values[p] != 0.0)
                trips.push_back({i, j, s.values[p] / colsum[j]});
        }
    for (std::size_t j = 0; j < s.n_cols; ++j)
        if (colsum[j] == 0.0) trips.push_back({j, j, 1.0});
    return detail::from_triplets(s.n_rows, s.n_cols, std::move(trips));
}

// L1 column normalization for signed matrices; zero columns become e_j.
inline SparseMatrix column_normalize_l1(const SparseMatrix& s) {
    if (s.n_rows != s.n_cols)
        throw std::invalid_argument("column_normalize_l1: matrix must be square");
    std::vector<double> colsum(s.n_cols, 0.0);
    for (std::size_t p = 0; p < s.values.size(); ++p)
        colsum[s.col_indices[p]] += std::abs(s.values[p]);
    std::vector<detail::Triplet> trips;
    trips.reserve(s.nnz());
    for (std::size_t i = 0; i < s.n_rows; ++i)
        for (std::size_t p = s.row_offsets[i]; p < s.row_offsets[i + 1]; ++p) {
            std::size_t j = s.col_indices[p];
            if (colsum[j] > 0.0 && s.values[p] != 0.0)
                trips.push_back({i, j, s.values[p] / colsum[j]});
        }
    for (std::size_t j = 0; j < s.n_cols; ++j)
        if (colsum[j] == 0.0) trips.push_back({j, j, 1.0});
    return detail::from_triplets(s.n_rows, s.n_cols, std::move(trips));
}

inline std::vector<double> column_sums(const SparseMatrix& s) {
    std::vector<double> sums(s.n_cols, 0.0);
    for (std::size_t p = 0; p < s.values.size(); ++p)
        sums[s.col_indices[p]] += s.values[p];
    return sums;
}

}  // namespace wavebank
