#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavebank/config.hpp"
#include "wavebank/eval.hpp"
#include "wavebank/io.hpp"
#include "wavebank/model.hpp"
#include "wavebank/synth.hpp"
#include "wavebank/wavelet.hpp"

namespace wavebank {

inline SyntheticDataset synthetic_from_preset(const std::string& name,
                                              std::uint64_t seed,
                                              double perturbation = 0.1) {
    if (name == "house") return make_house_dataset(seed);
    if (name == "varied") return make_varied_dataset(seed);
    if (name == "house-perturbed")
        return perturb(make_house_dataset(seed), perturbation, seed + 1);
    if (name == "varied-perturbed")
        return perturb(make_varied_dataset(seed), perturbation, seed + 1);
    throw std::invalid_argument("no synthetic generator for preset: " + name);
}

inline bool is_synthetic_preset(const std::string& name) {
    return name == "house" || name == "varied" || name == "house-perturbed" ||
           name == "varied-perturbed";
}

// Resolves the dataset named by a config: synthetic presets generate in
// memory, everything else loads the TSV triple.
inline Graph dataset_from_config(const ExperimentConfig& cfg) {
    if (is_synthetic_preset(cfg.preset))
        return synthetic_from_preset(cfg.preset, cfg.model.seed).graph;
    if (cfg.edges_path.empty() || cfg.features_path.empty())
        throw std::invalid_argument("config names no dataset (preset or file paths)");
    return load_graph(cfg.edges_path, cfg.features_path, cfg.labels_path);
}

struct RunOutputs {
    Graph graph;
    ViewSet views;
    TrainResult result;
    nlohmann::json metrics;
};

// Full train + eval pass.  Everything in `metrics` is deterministic for a
// fixed config; wall-clock timing is reported separately by the CLI.
inline RunOutputs run_experiment(const ExperimentConfig& cfg) {
    RunOutputs out;
    out.graph = dataset_from_config(cfg);
    out.views = build_view_set(out.graph, cfg.model.view);
    out.result = train(out.graph, out.views, cfg.model);

    nlohmann::json m;
    m["config"] = cfg.echo();
    m["n_nodes"] = out.graph.n_nodes;
    m["n_edges"] = out.graph.n_edges();
    if (out.graph.labels && out.graph.n_edges() > 0) {
        auto hs = homophily(out.graph);
        m["homophily"] = hs.value;
    }

    nlohmann::json densities = nlohmann::json::array();
    for (const auto& v : out.views.views) densities.push_back(v.density());
    m["view_density"] = densities;

    const auto& hist = out.result.history;
    nlohmann::json jl;
    jl["epochs"] = hist.loss.size();
    jl["best_epoch"] = hist.best_epoch;
    jl["stopping_reason"] = hist.stopping_reason;
    if (!hist.loss.empty()) {
        jl["first"] = hist.loss.front();
        jl["last"] = hist.loss.back();
        jl["best"] = hist.loss[hist.best_epoch];
    }
    m["loss"] = jl;

    if (out.graph.labels) {
        const auto& y = *out.graph.labels;
        if (cfg.eval_mode == EvalMode::kCluster || cfg.eval_mode == EvalMode::kBoth) {
            std::size_t k = out.graph.n_classes();
            auto pred = single_linkage_cluster(out.result.embedding, k);
            auto [h, c] = homogeneity_completeness(y, pred);
            nlohmann::json jc;
            jc["n_clusters"] = k;
            jc["homogeneity"] = h;
            jc["completeness"] = c;
            jc["silhouette"] = k >= 2 ? silhouette(out.result.embedding, pred) : 0.0;
            m["clustering"] = jc;
        }
        if (cfg.eval_mode == EvalMode::kClassify || cfg.eval_mode == EvalMode::kBoth) {
            auto splits = random_splits(out.graph.n_nodes, cfg.model.seed);
            auto probe = logistic_probe(out.result.embedding, y, splits);
            nlohmann::json jp;
            jp["accuracy_mean"] = probe.mean;
            jp["accuracy_std"] = probe.stddev;
            jp["per_split"] = probe.per_split;
            m["probe"] = jp;
        }
    }
    out.metrics = m;
    return out;
}

inline void write_run_outputs(const RunOutputs& out, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_json(out.metrics, dir + "/metrics.json");
    save_embedding_tsv(out.result.embedding, dir + "/embeddings.tsv");
    Mat coords = pca2(out.result.embedding);
    save_pca_tsv(coords, out.graph.labels ? *out.graph.labels : std::vector<int>{},
                 dir + "/pca.tsv");
    save_params(out.result.params, dir + "/params.json");
}

}  // namespace wavebank
