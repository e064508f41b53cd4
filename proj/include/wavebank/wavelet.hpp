#pragma once

#include <cmath>
#include <cstddef>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavebank/graph.hpp"
#include "wavebank/sparse.hpp"

namespace wavebank {

enum class ThresholdMode { kAbsolute, kSigned };

inline std::string to_string(ThresholdMode m) {
    return m == ThresholdMode::kAbsolute ? "absolute" : "signed";
}

inline ThresholdMode threshold_mode_from_string(const std::string& s) {
    if (s == "absolute") return ThresholdMode::kAbsolute;
    if (s == "signed") return ThresholdMode::kSigned;
    throw std::invalid_argument("unknown threshold mode: " + s);
}

// Lazy random walk operator T = alpha*I + (1-alpha)*A_colnorm.
struct DiffusionOperator {
    SparseMatrix matrix;
    double alpha = 0.2;
};

// Dyadic band-pass filters Phi_1..Phi_K plus the low-pass residual T^{2^{K-1}}.
struct FilterBank {
    std::vector<SparseMatrix> filters;
    std::vector<std::size_t> scales;   // 2^{j-1} per filter
    SparseMatrix residual;
};

struct ViewSet {
    std::vector<SparseMatrix> views;
    bool includes_local_adjacency = false;
    double epsilon = 0.0;
    ThresholdMode threshold_mode = ThresholdMode::kAbsolute;
};

struct ViewConfig {
    std::size_t k = 3;
    double alpha = 0.2;
    double epsilon = 1e-4;
    ThresholdMode threshold_mode = ThresholdMode::kAbsolute;
    bool include_local_adjacency = false;

    std::size_t total_views() const { return k + (include_local_adjacency ? 1 : 0); }
};

inline DiffusionOperator lazy_diffusion(const SparseMatrix& adj_col_norm, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("lazy_diffusion: alpha must be in (0,1)");
    if (alpha < 0.5 || alpha > 1.0)
        std::clog << "note: restart probability " << alpha
                  << " is outside [0.5, 1]\n";
    for (double s : column_sums(adj_col_norm))
        if (std::abs(s - 1.0) > 1e-9)
            throw std::invalid_argument("lazy_diffusion: input is not column-stochastic");
    DiffusionOperator op;
    op.alpha = alpha;
    op.matrix = sparse_add(sparse_identity(adj_col_norm.n_rows), adj_col_norm,
                           alpha, 1.0 - alpha);
    return op;
}

// Phi_1 = I - T, Phi_{j+1} = P_j - P_{j+1} with P_1 = T, P_{j+1} = P_j^2,
// computed by repeated squaring.  Residual is P_K = T^{2^{K-1}}.
inline FilterBank build_filters(const DiffusionOperator& t, std::size_t k) {
    if (k < 1) throw std::invalid_argument("build_filters: K must be >= 1");
    FilterBank bank;
    SparseMatrix power = t.matrix;  // P_j = T^{2^{j-1}}
    bank.filters.push_back(
        sparse_add(sparse_identity(t.matrix.n_rows), power, 1.0, -1.0));
    bank.scales.push_back(1);
    for (std::size_t j = 2; j <= k; ++j) {
        SparseMatrix next = sparse_matmul(power, power);
        bank.filters.push_back(sparse_add(power, next, 1.0, -1.0));
        bank.scales.push_back(std::size_t{1} << (j - 1));
        power = std::move(next);
        if (bank.filters.back().density() > 0.30)
            std::clog << "warning: filter " << j << " density "
                      << bank.filters.back().density() << " exceeds 0.30\n";
    }
    bank.residual = std::move(power);
    return bank;
}

// Removes entries by |v| < eps (absolute) or v < eps (signed, the literal
// elementwise comparison) and re-compacts the structure.
inline SparseMatrix sparsify(const SparseMatrix& phi, double epsilon, ThresholdMode mode) {
    if (epsilon < 0.0) throw std::invalid_argument("sparsify: epsilon must be >= 0");
    SparseMatrix out(phi.n_rows, phi.n_cols);
    for (std::size_t i = 0; i < phi.n_rows; ++i) {
        for (std::size_t p = phi.row_offsets[i]; p < phi.row_offsets[i + 1]; ++p) {
            double v = phi.values[p];
            bool keep = mode == ThresholdMode::kAbsolute ? std::abs(v) >= epsilon
                                                         : v >= epsilon;
            if (keep && v != 0.0) {
                out.col_indices.push_back(phi.col_indices[p]);
                out.values.push_back(v);
                ++out.row_offsets[i + 1];
            }
        }
    }
    for (std::size_t i = 0; i < phi.n_rows; ++i) out.row_offsets[i + 1] += out.row_offsets[i];
    return out;
}

inline SparseMatrix normalize_view(const SparseMatrix& a_k) {
    return column_normalize_l1(a_k);
}

// column_normalize -> lazy_diffusion -> build_filters -> sparsify -> normalize,
// optionally prepending the column-normalized adjacency as a local view.
inline ViewSet build_view_set(const Graph& g, const ViewConfig& config) {
    SparseMatrix a1 = column_normalize(g.adjacency);
    DiffusionOperator t = lazy_diffusion(a1, config.alpha);
    FilterBank bank = build_filters(t, config.k);
    ViewSet vs;
    vs.epsilon = config.epsilon;
    vs.threshold_mode = config.threshold_mode;
    vs.includes_local_adjacency = config.include_local_adjacency;
    if (config.include_local_adjacency) vs.views.push_back(a1);
    for (const auto& phi : bank.filters)
        vs.views.push_back(
            normalize_view(sparsify(phi, config.epsilon, config.threshold_mode)));
    return vs;
}

struct FilterStats {
    std::size_t scale = 0;
    double density = 0.0;
    double max_column_sum_drift = 0.0;  // |column sum| max (raw filters sum to 0)
    double spectral_bound = 0.0;        // power-iteration estimate of |lambda_max|
};

inline double power_iteration_bound(const SparseMatrix& s, std::size_t iters = 50) {
    if (s.n_rows == 0) return 0.0;
    Mat v = Mat::Ones(static_cast<Eigen::Index>(s.n_cols), 1);
    v /= v.norm();
    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        Mat w = spmm(s, v);
        double n = w.norm();
        if (n == 0.0) return 0.0;
        lambda = n;
        v = w / n;
    }
    return lambda;
}

inline std::vector<FilterStats> filter_statistics(const FilterBank& bank) {
    std::vector<FilterStats> stats;
    for (std::size_t i = 0; i < bank.filters.size(); ++i) {
        FilterStats fs;
        fs.scale = bank.scales[i];
        fs.density = bank.filters[i].density();
        for (double s : column_sums(bank.filters[i]))
            fs.max_column_sum_drift = std::max(fs.max_column_sum_drift, std::abs(s));
        fs.spectral_bound = power_iteration_bound(bank.filters[i]);
        stats.push_back(fs);
    }
    return stats;
}

}  // namespace wavebank
