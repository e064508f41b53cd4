#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavebank/graph.hpp"
#include "wavebank/model.hpp"

namespace wavebank {

inline void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write: " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void save_embedding_tsv(const Mat& h, const std::string& path) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            if (j) out << '\t';
            out << format_double(h(i, j));
        }
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

inline Mat load_embedding_tsv(const std::string& path) {
    auto rows = detail::read_tsv_rows(path);
    if (rows.empty()) throw std::runtime_error(path + ": empty embedding file");
    Mat h(static_cast<Eigen::Index>(rows.size()),
          static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::runtime_error(path + ": ragged embedding rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return h;
}

inline void save_pca_tsv(const Mat& coords, const std::vector<int>& labels,
                         const std::string& path) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        out << i << '\t' << format_double(coords(i, 0)) << '\t'
            << format_double(coords(i, 1));
        if (!labels.empty()) out << '\t' << labels[static_cast<std::size_t>(i)];
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

namespace detail {

inline nlohmann::json tensor_to_json(const TensorPtr& t) {
    nlohmann::json j;
    j["rows"] = t->value.rows();
    j["cols"] = t->value.cols();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(t->value.size()));
    for (Eigen::Index i = 0; i < t->value.rows(); ++i)
        for (Eigen::Index k = 0; k < t->value.cols(); ++k) flat.push_back(t->value(i, k));
    j["values"] = flat;
    return j;
}

inline TensorPtr tensor_from_json(const nlohmann::json& j) {
    Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    auto flat = j.at("values").get<std::vector<double>>();
    if (flat.size() != static_cast<std::size_t>(rows * cols))
        throw std::runtime_error("tensor manifest: shape/value mismatch");
    Mat m(rows, cols);
    std::size_t p = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = flat[p++];
    return make_leaf(std::move(m), true);
}

}  // namespace detail

// Flat JSON manifest with shape headers for every trainable array.
inline void save_params(const ParamStore& ps, const std::string& path) {
    nlohmann::json j;
    j["encoders"] = nlohmann::json::array();
    for (const auto& e : ps.encoders) {
        nlohmann::json je;
        je["w1"] = detail::tensor_to_json(e.w1);
        je["slope1"] = detail::tensor_to_json(e.slope1);
        je["w2"] = detail::tensor_to_json(e.w2);
        je["slope2"] = detail::tensor_to_json(e.slope2);
        j["encoders"].push_back(je);
    }
    j["projection"]["m1"] = detail::tensor_to_json(ps.projection.m1);
    j["projection"]["b1"] = detail::tensor_to_json(ps.projection.b1);
    j["projection"]["slope_p"] = detail::tensor_to_json(ps.projection.slope_p);
    j["projection"]["m2"] = detail::tensor_to_json(ps.projection.m2);
    j["projection"]["b2"] = detail::tensor_to_json(ps.projection.b2);
    write_text_atomic(path, j.dump(2) + "\n");
}

inline ParamStore load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open params: " + path);
    nlohmann::json j;
    in >> j;
    ParamStore ps;
    for (const auto& je : j.at("encoders")) {
        EncoderParams e;
        e.w1 = detail::tensor_from_json(je.at("w1"));
        e.slope1 = detail::tensor_from_json(je.at("slope1"));
        e.w2 = detail::tensor_from_json(je.at("w2"));
        e.slope2 = detail::tensor_from_json(je.at("slope2"));
        ps.encoders.push_back(e);
    }
    const auto& jp = j.at("projection");
    ps.projection.m1 = detail::tensor_from_json(jp.at("m1"));
    ps.projection.b1 = detail::tensor_from_json(jp.at("b1"));
    ps.projection.slope_p = detail::tensor_from_json(jp.at("slope_p"));
    ps.projection.m2 = detail::tensor_from_json(jp.at("m2"));
    ps.projection.b2 = detail::tensor_from_json(jp.at("b2"));
    return ps;
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace wavebank
