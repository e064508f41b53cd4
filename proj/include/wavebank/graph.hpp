#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wavebank/sparse.hpp"

namespace wavebank {

// Undirected attributed graph. Adjacency is symmetric with zero diagonal;
// all types are immutable after construction.
struct Graph {
    std::size_t n_nodes = 0;
    SparseMatrix adjacency;
    Mat features;                       // N x d_i
    std::optional<std::vector<int>> labels;

    std::size_t n_edges() const { return adjacency.nnz() / 2; }

    std::size_t n_classes() const {
        if (!labels) return 0;
        int max_label = -1;
        for (int l : *labels) max_label = std::max(max_label, l);
        return static_cast<std::size_t>(max_label + 1);
    }

    std::vector<std::size_t> degrees() const {
        std::vector<std::size_t> deg(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i)
            deg[i] = adjacency.row_offsets[i + 1] - adjacency.row_offsets[i];
        return deg;
    }
};

struct HomophilyScore {
    double value = 0.0;
    std::size_t n_edges_counted = 0;
};

// Builds a graph from an undirected edge list: duplicates collapse to a
// single unit-weight edge, self-loops are dropped.
inline Graph make_graph(std::size_t n_nodes,
                        const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                        Mat features,
                        std::optional<std::vector<int>> labels = std::nullopt) {
    if (static_cast<std::size_t>(features.rows()) != n_nodes)
        throw std::invalid_argument("make_graph: feature row count != n_nodes");
    if (labels && labels->size() != n_nodes)
        throw std::invalid_argument("make_graph: label count != n_nodes");
    std::set<std::pair<std::size_t, std::size_t>> uniq;
    for (auto [u, v] : edges) {
        if (u >= n_nodes || v >= n_nodes)
            throw std::out_of_range("make_graph: node id out of range");
        if (u == v) continue;
        uniq.insert({std::min(u, v), std::max(u, v)});
    }
    std::vector<detail::Triplet> trips;
    trips.reserve(2 * uniq.size());
    for (auto [u, v] : uniq) {
        trips.push_back({u, v, 1.0});
        trips.push_back({v, u, 1.0});
    }
    Graph g;
    g.n_nodes = n_nodes;
    g.adjacency = detail::from_triplets(n_nodes, n_nodes, std::move(trips));
    g.features = std::move(features);
    g.labels = std::move(labels);
    return g;
}

namespace detail {

inline std::vector<std::vector<double>> read_tsv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, '\t')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(tok, &pos);
                if (pos != tok.size()) throw std::invalid_argument(tok);
                row.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": malformed value '" + tok + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

// Loads the on-disk TSV format: edges.tsv (u<TAB>v per line, 0-based ids),
// features.tsv (N rows of d_i decimals), optional labels.tsv (N integers).
inline Graph load_graph(const std::string& edges_path,
                        const std::string& features_path,
                        const std::string& labels_path = "") {
    auto feat_rows = detail::read_tsv_rows(features_path);
    if (feat_rows.empty()) throw std::runtime_error("features file is empty");
    std::size_t n = feat_rows.size();
    std::size_t d = feat_rows[0].size();
    for (std::size_t i = 0; i < n; ++i)
        if (feat_rows[i].size() != d)
            throw std::runtime_error(features_path + ":" + std::to_string(i + 1) +
                                     ": inconsistent feature width");
    Mat features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                feat_rows[i][j];

    auto edge_rows = detail::read_tsv_rows(edges_path);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(edge_rows.size());
    for (std::size_t i = 0; i < edge_rows.size(); ++i) {
        if (edge_rows[i].size() != 2)
            throw std::runtime_error(edges_path + ":" + std::to_string(i + 1) +
                                     ": expected two node ids");
        double u = edge_rows[i][0], v = edge_rows[i][1];
        if (u < 0 || v < 0 || u != std::floor(u) || v != std::floor(v))
            throw std::runtime_error(edges_path + ":" + std::to_string(i + 1) +
                                     ": node ids must be nonnegative integers");
        if (u >= static_cast<double>(n) || v >= static_cast<double>(n))
            throw std::out_of_range(edges_path + ":" + std::to_string(i + 1) +
                                    ": node id exceeds feature row count");
        edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    }

    std::optional<std::vector<int>> labels;
    if (!labels_path.empty()) {
        auto label_rows = detail::read_tsv_rows(labels_path);
        if (label_rows.size() != n)
            throw std::runtime_error(labels_path + ": label count != node count");
        std::vector<int> ls(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (label_rows[i].size() != 1 || label_rows[i][0] != std::floor(label_rows[i][0]))
                throw std::runtime_error(labels_path + ":" + std::to_string(i + 1) +
                                         ": expected a single integer label");
            ls[i] = static_cast<int>(label_rows[i][0]);
        }
        labels = std::move(ls);
    }
    return make_graph(n, edges, std::move(features), std::move(labels));
}

// Fraction of undirected edges whose endpoints share a label.
inline HomophilyScore homophily(const Graph& g) {
    if (!g.labels) throw std::logic_error("homophily: graph has no labels");
    const auto& y = *g.labels;
    std::size_t same = 0, total = 0;
    for (std::size_t i = 0; i < g.n_nodes; ++i)
        for (std::size_t p = g.adjacency.row_offsets[i];
             p < g.adjacency.row_offsets[i + 1]; ++p) {
            std::size_t j = g.adjacency.col_indices[p];
            if (j <= i) continue;  // count each undirected edge once
            ++total;
            if (y[i] == y[j]) ++same;
        }
    if (total == 0) throw std::logic_error("homophily: graph has no edges");
    return {static_cast<double>(same) / static_cast<double>(total), total};
}

inline void save_graph_tsv(const Graph& g, const std::string& edges_path,
                           const std::string& features_path,
                           const std::string& labels_path = "") {
    {
        std::ofstream out(edges_path);
        for (std::size_t i = 0; i < g.n_nodes; ++i)
            for (std::size_t p = g.adjacency.row_offsets[i];
                 p < g.adjacency.row_offsets[i + 1]; ++p) {
                std::size_t j = g.adjacency.col_indices[p];
                if (j > i) out << i << '\t' << j << '\n';
            }
    }
    {
        std::ofstream out(features_path);
        out.precision(17);
        for (Eigen::Index i = 0; i < g.features.rows(); ++i) {
            for (Eigen::Index j = 0; j < g.features.cols(); ++j) {
                if (j) out << '\t';
                out << g.features(i, j);
            }
            out << '\n';
        }
    }
    if (!labels_path.empty() && g.labels) {
        std::ofstream out(labels_path);
        for (int l : *g.labels) out << l << '\n';
    }
}

}  // namespace wavebank
