#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wavebank/graph.hpp"

namespace wavebank {

enum class ShapeKind { kHouse, kFan, kStar };

inline std::string to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::kHouse: return "house";
        case ShapeKind::kFan: return "fan";
        case ShapeKind::kStar: return "star";
    }
    return "?";
}

struct ShapeSpec {
    ShapeKind kind = ShapeKind::kHouse;
    std::size_t size = 0;  // leaf count for fan/star; ignored for house
};

struct ShapeGraph {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<int> roles;   // kind-local role ids, contiguous from 0
    std::size_t anchor = 0;
};

struct SyntheticDataset {
    Graph graph;
    std::vector<int> roles;
    std::uint64_t generation_seed = 0;
    double perturbation_rate = 0.0;
};

// House: square base 0-1-2-3 plus roof apex 4 on the 2-3 edge.
// Star(s): hub 0 with s leaves. Fan(s): star plus a path through the leaves.
inline ShapeGraph make_shape(const ShapeSpec& spec) {
    ShapeGraph sg;
    switch (spec.kind) {
        case ShapeKind::kHouse:
            sg.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {3, 4}, {2, 4}};
            sg.roles = {0, 0, 1, 1, 2};  // base-bottom, base-top, roof
            sg.anchor = 0;
            return sg;
        case ShapeKind::kStar: {
            if (spec.size < 2) throw std::invalid_argument("star: size must be >= 2");
            sg.roles.assign(spec.size + 1, 1);
            sg.roles[0] = 0;  // hub
            for (std::size_t l = 1; l <= spec.size; ++l) sg.edges.push_back({0, l});
            sg.anchor = 0;
            return sg;
        }
        case ShapeKind::kFan: {
            if (spec.size < 2) throw std::invalid_argument("fan: size must be >= 2");
            sg.roles.assign(spec.size + 1, 2);  // path-interior by default
            sg.roles[0] = 0;                    // hub
            sg.roles[1] = 1;                    // path ends
            sg.roles[spec.size] = 1;
            for (std::size_t l = 1; l <= spec.size; ++l) sg.edges.push_back({0, l});
            for (std::size_t l = 1; l < spec.size; ++l) sg.edges.push_back({l, l + 1});
            sg.anchor = 0;
            return sg;
        }
    }
    throw std::invalid_argument("make_shape: unknown kind");
}

inline Mat degree_features(const Graph& g);

// Cycle of cycle_len nodes with shapes attached by one edge from each shape
// anchor to an evenly spaced cycle node.  A node's structural role is the
// equivalence class of (shape kind, kind-local role, hop distance to the
// nearest cycle node, degree): nodes share a role exactly when they play the
// same connectivity role in the assembled graph, so attachment cycle nodes,
// shape anchors, and near/far copies of a within-shape role are split apart.
inline SyntheticDataset assemble_cycle(const std::vector<ShapeSpec>& shapes,
                                       std::size_t cycle_len, std::uint64_t seed) {
    if (cycle_len < 3) throw std::invalid_argument("assemble_cycle: cycle_len must be >= 3");
    if (shapes.size() > cycle_len)
        throw std::invalid_argument("assemble_cycle: more shapes than cycle positions");

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    // (kind id, kind-local role); -1/0 for cycle nodes
    std::vector<std::pair<int, int>> local(cycle_len, {-1, 0});
    for (std::size_t i = 0; i < cycle_len; ++i)
        edges.push_back({i, (i + 1) % cycle_len});

    std::size_t next_node = cycle_len;
    for (std::size_t s = 0; s < shapes.size(); ++s) {
        ShapeGraph sg = make_shape(shapes[s]);
        std::size_t attach = s * cycle_len / shapes.size();
        std::size_t base = next_node;
        for (auto [u, v] : sg.edges) edges.push_back({base + u, base + v});
        edges.push_back({base + sg.anchor, attach});
        for (int r : sg.roles) local.push_back({static_cast<int>(shapes[s].kind), r});
        next_node += sg.roles.size();
    }

    std::vector<std::vector<std::size_t>> adj(next_node);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }

    // multi-source BFS from the cycle
    std::vector<std::size_t> dist(next_node, SIZE_MAX);
    std::vector<std::size_t> frontier;
    for (std::size_t i = 0; i < cycle_len; ++i) {
        dist[i] = 0;
        frontier.push_back(i);
    }
    while (!frontier.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t u : frontier)
            for (std::size_t v : adj[u])
                if (dist[v] == SIZE_MAX) {
                    dist[v] = dist[u] + 1;
                    next.push_back(v);
                }
        frontier = std::move(next);
    }

    std::map<std::tuple<int, int, std::size_t, std::size_t>, int> role_ids;
    std::vector<int> roles;
    for (std::size_t i = 0; i < next_node; ++i) {
        auto key = std::make_tuple(local[i].first, local[i].second, dist[i],
                                   adj[i].size());
        auto it = role_ids.find(key);
        if (it == role_ids.end())
            it = role_ids.emplace(key, static_cast<int>(role_ids.size())).first;
        roles.push_back(it->second);
    }

    SyntheticDataset ds;
    ds.generation_seed = seed;
    ds.roles = roles;
    Mat placeholder = Mat::Zero(static_cast<Eigen::Index>(next_node), 1);
    ds.graph = make_graph(next_node, edges, placeholder, roles);
    ds.graph.features = degree_features(ds.graph);
    return ds;
}

// Single-column attribute matrix: degree / max degree.
inline Mat degree_features(const Graph& g) {
    auto deg = g.degrees();
    std::size_t max_deg = 0;
    for (std::size_t d : deg) max_deg = std::max(max_deg, d);
    Mat x = Mat::Zero(static_cast<Eigen::Index>(g.n_nodes), 1);
    if (max_deg == 0) return x;
    for (std::size_t i = 0; i < g.n_nodes; ++i)
        x(static_cast<Eigen::Index>(i), 0) =
            static_cast<double>(deg[i]) / static_cast<double>(max_deg);
    return x;
}

inline Mat degree_attributes(const Graph& g) { return degree_features(g); }

// Adds ceil(p * |E|) uniformly random new edges between distinct
// non-adjacent pairs; roles and attributes are regenerated from the new
// degrees.  Deterministic given seed.
inline SyntheticDataset perturb(const SyntheticDataset& ds, double p, std::uint64_t seed) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("perturb: p must be in [0,1)");
    const Graph& g = ds.graph;
    std::size_t n = g.n_nodes;
    std::size_t n_existing = g.n_edges();
    std::size_t n_new = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(n_existing)));
    std::size_t max_pairs = n * (n - 1) / 2;
    if (n_existing + n_new > max_pairs)
        throw std::invalid_argument("perturb: not enough non-adjacent pairs");

    std::set<std::pair<std::size_t, std::size_t>> present;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t q = g.adjacency.row_offsets[i];
             q < g.adjacency.row_offsets[i + 1]; ++q) {
            std::size_t j = g.adjacency.col_indices[q];
            if (j > i) {
                present.insert({i, j});
                edges.push_back({i, j});
            }
        }

    std::mt19937_64 rng(seed);
    std::size_t added = 0;
    while (added < n_new) {
        std::size_t u = rng() % n;
        std::size_t v = rng() % n;
        if (u == v) continue;
        auto key = std::make_pair(std::min(u, v), std::max(u, v));
        if (present.count(key)) continue;
        present.insert(key);
        edges.push_back(key);
        ++added;
    }

    SyntheticDataset out;
    out.generation_seed = seed;
    out.perturbation_rate = p;
    out.roles = ds.roles;
    out.graph = make_graph(n, edges, g.features, ds.roles);
    out.graph.features = degree_features(out.graph);
    return out;
}

// Benchmark defaults: House = 10 houses on a 30-cycle; Varied = 3 copies of
// (house, fan(6), star(6)) evenly spaced on a 45-cycle, so every shape kind
// appears in an identical cycle context; perturbed variants use p=0.1.
inline SyntheticDataset make_house_dataset(std::uint64_t seed) {
    std::vector<ShapeSpec> shapes(10, ShapeSpec{ShapeKind::kHouse, 0});
    return assemble_cycle(shapes, 30, seed);
}

inline SyntheticDataset make_varied_dataset(std::uint64_t seed) {
    std::vector<ShapeSpec> shapes;
    for (std::size_t i = 0; i < 3; ++i) {
        shapes.push_back({ShapeKind::kHouse, 0});
        shapes.push_back({ShapeKind::kFan, 6});
        shapes.push_back({ShapeKind::kStar, 6});
    }
    return assemble_cycle(shapes, 45, seed);
}

}  // namespace wavebank
