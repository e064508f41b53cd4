#pragma once

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wavebank/model.hpp"

namespace wavebank {

enum class EvalMode { kCluster, kClassify, kBoth };

inline std::string to_string(EvalMode m) {
    switch (m) {
        case EvalMode::kCluster: return "cluster";
        case EvalMode::kClassify: return "classify";
        case EvalMode::kBoth: return "both";
    }
    return "?";
}

inline EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "cluster") return EvalMode::kCluster;
    if (s == "classify") return EvalMode::kClassify;
    if (s == "both") return EvalMode::kBoth;
    throw std::invalid_argument("unknown eval mode: " + s);
}

struct ExperimentConfig {
    std::string preset;        // synthetic preset name, empty for file input
    std::string edges_path, features_path, labels_path;
    ModelConfig model;
    EvalMode eval_mode = EvalMode::kBoth;
    std::string out_dir = ".";

    bool has_dataset() const {
        return !preset.empty() || (!edges_path.empty() && !features_path.empty());
    }

    nlohmann::json echo() const {
        nlohmann::json j;
        j["preset"] = preset;
        j["edges"] = edges_path;
        j["features"] = features_path;
        j["labels"] = labels_path;
        j["k"] = model.view.k;
        j["alpha"] = model.view.alpha;
        j["epsilon"] = model.view.epsilon;
        j["threshold_mode"] = to_string(model.view.threshold_mode);
        j["include_local_adjacency"] = model.view.include_local_adjacency;
        j["encoder_mode"] = to_string(model.encoder_mode);
        j["embed_dim"] = model.embed_dim;
        j["proj_dim"] = model.proj_dim;
        j["lr"] = model.lr;
        j["max_epochs"] = model.max_epochs;
        j["patience"] = model.patience;
        j["min_improvement"] = model.min_improvement;
        j["seed"] = model.seed;
        j["paper_prefactor"] = model.paper_prefactor;
        j["readout_sigmoid"] = model.readout_sigmoid;
        j["eval"] = to_string(eval_mode);
        j["out"] = out_dir;
        return j;
    }
};

// Presets pin the per-dataset view choices: synthetic rows use K=3 with
// dedicated encoders; "structural" uses K=4, "proximal" K=2 plus the local
// adjacency view, both with a shared encoder.
inline ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.preset = name;
    cfg.model.view.alpha = 0.2;
    cfg.model.view.epsilon = 1e-4;
    if (name == "house" || name == "house-perturbed" || name == "varied" ||
        name == "varied-perturbed") {
        cfg.model.view.k = 3;
        cfg.model.encoder_mode = EncoderMode::kDedicated;
        cfg.model.max_epochs = 400;
    } else if (name == "structural") {
        cfg.model.view.k = 4;
        cfg.model.encoder_mode = EncoderMode::kShared;
    } else if (name == "proximal") {
        cfg.model.view.k = 2;
        cfg.model.view.include_local_adjacency = true;
        cfg.model.encoder_mode = EncoderMode::kShared;
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return cfg;
}

namespace detail {

template <typename T>
T require_type(const nlohmann::json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("config key '" + key + "' has the wrong type");
    }
}

}  // namespace detail

// Parses a JSON config object; unknown keys are rejected by name so a
// misspelled hyperparameter cannot be ignored silently.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

    ExperimentConfig cfg;
    if (j.contains("preset"))
        cfg = preset_config(detail::require_type<std::string>(j["preset"], "preset"));

    static const std::set<std::string> known = {
        "preset", "edges", "features", "labels", "k", "alpha", "epsilon",
        "threshold_mode", "include_local_adjacency", "encoder_mode", "embed_dim",
        "proj_dim", "lr", "max_epochs", "patience", "min_improvement", "seed",
        "paper_prefactor", "readout_sigmoid", "eval", "out"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw std::invalid_argument("unknown config key '" + key + "'");

    using detail::require_type;
    if (j.contains("edges")) cfg.edges_path = require_type<std::string>(j["edges"], "edges");
    if (j.contains("features"))
        cfg.features_path = require_type<std::string>(j["features"], "features");
    if (j.contains("labels")) cfg.labels_path = require_type<std::string>(j["labels"], "labels");
    if (j.contains("k")) cfg.model.view.k = require_type<std::size_t>(j["k"], "k");
    if (j.contains("alpha")) {
        cfg.model.view.alpha = require_type<double>(j["alpha"], "alpha");
        if (!(cfg.model.view.alpha > 0.0 && cfg.model.view.alpha < 1.0))
            throw std::invalid_argument("config key 'alpha' must be in (0,1)");
    }
    if (j.contains("epsilon")) {
        cfg.model.view.epsilon = require_type<double>(j["epsilon"], "epsilon");
        if (cfg.model.view.epsilon < 0.0)
            throw std::invalid_argument("config key 'epsilon' must be >= 0");
    }
    if (j.contains("threshold_mode"))
        cfg.model.view.threshold_mode = threshold_mode_from_string(
            require_type<std::string>(j["threshold_mode"], "threshold_mode"));
    if (j.contains("include_local_adjacency"))
        cfg.model.view.include_local_adjacency =
            require_type<bool>(j["include_local_adjacency"], "include_local_adjacency");
    if (j.contains("encoder_mode"))
        cfg.model.encoder_mode = encoder_mode_from_string(
            require_type<std::string>(j["encoder_mode"], "encoder_mode"));
    if (j.contains("embed_dim"))
        cfg.model.embed_dim = require_type<std::size_t>(j["embed_dim"], "embed_dim");
    if (j.contains("proj_dim"))
        cfg.model.proj_dim = require_type<std::size_t>(j["proj_dim"], "proj_dim");
    if (j.contains("lr")) cfg.model.lr = require_type<double>(j["lr"], "lr");
    if (j.contains("max_epochs"))
        cfg.model.max_epochs = require_type<std::size_t>(j["max_epochs"], "max_epochs");
    if (j.contains("patience"))
        cfg.model.patience = require_type<std::size_t>(j["patience"], "patience");
    if (j.contains("min_improvement"))
        cfg.model.min_improvement = require_type<double>(j["min_improvement"], "min_improvement");
    if (j.contains("seed"))
        cfg.model.seed = require_type<std::uint64_t>(j["seed"], "seed");
    if (j.contains("paper_prefactor"))
        cfg.model.paper_prefactor = require_type<bool>(j["paper_prefactor"], "paper_prefactor");
    if (j.contains("readout_sigmoid"))
        cfg.model.readout_sigmoid = require_type<bool>(j["readout_sigmoid"], "readout_sigmoid");
    if (j.contains("eval"))
        cfg.eval_mode = eval_mode_from_string(require_type<std::string>(j["eval"], "eval"));
    if (j.contains("out")) cfg.out_dir = require_type<std::string>(j["out"], "out");

    cfg.model.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace wavebank
