#pragma once

// Protograph serialization: JSON (lossless, with node metadata) and a
// plain-text base-matrix format (n_c rows of n_v integers).

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "scldpc/protograph.hpp"

namespace scldpc {

inline nlohmann::json meta_to_json(const NodeMeta& m) {
    return {{"component", m.component}, {"segment", m.segment}, {"class", to_string(m.pos)}};
}

inline NodeMeta meta_from_json(const nlohmann::json& j) {
    NodeMeta m;
    m.component = j.at("component").get<std::string>();
    m.segment = j.at("segment").get<int>();
    m.pos = position_class_from_string(j.at("class").get<std::string>());
    return m;
}

inline nlohmann::json to_json(const Protograph& g) {
    nlohmann::json j;
    j["label"] = g.label;
    j["n_v"] = g.n_v;
    j["n_c"] = g.n_c;
    auto edges = nlohmann::json::array();
    for (const Edge& e : g.edges) edges.push_back({e.check, e.variable});
    j["edges"] = std::move(edges);
    auto vm = nlohmann::json::array();
    for (const NodeMeta& m : g.variable_meta) vm.push_back(meta_to_json(m));
    j["variable_meta"] = std::move(vm);
    auto cm = nlohmann::json::array();
    for (const NodeMeta& m : g.check_meta) cm.push_back(meta_to_json(m));
    j["check_meta"] = std::move(cm);
    return j;
}

inline Protograph protograph_from_json(const nlohmann::json& j) {
    Protograph g;
    g.label = j.value("label", std::string());
    g.n_v = j.at("n_v").get<int>();
    g.n_c = j.at("n_c").get<int>();
    for (const auto& e : j.at("edges"))
        g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    if (j.contains("variable_meta")) {
        for (const auto& m : j.at("variable_meta")) g.variable_meta.push_back(meta_from_json(m));
        for (const auto& m : j.at("check_meta")) g.check_meta.push_back(meta_from_json(m));
    } else {
        g.variable_meta.assign(g.n_v, NodeMeta{});
        g.check_meta.assign(g.n_c, NodeMeta{});
    }
    g.validate();
    return g;
}

/// n_c lines of n_v space-separated multiplicities.
inline std::string to_base_matrix_text(const Protograph& g) {
    std::ostringstream os;
    for (const auto& row : g.base_matrix()) {
        for (int i = 0; i < g.n_v; ++i) {
            if (i) os << ' ';
            os << row[i];
        }
        os << '\n';
    }
    return os.str();
}

/// Reconstructs a protograph from base-matrix text. Node metadata is not
/// part of the format; edges are emitted row-major so the matrix, and the
/// text, round-trip exactly.
inline Protograph protograph_from_base_matrix_text(const std::string& text) {
    Protograph g;
    std::istringstream is(text);
    std::string line;
    std::vector<std::vector<int>> rows;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::vector<int> row;
        int x;
        while (ls >> x) {
            if (x < 0) throw std::invalid_argument("negative base-matrix entry");
            row.push_back(x);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("ragged base-matrix rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("empty base matrix");
    g.n_c = static_cast<int>(rows.size());
    g.n_v = static_cast<int>(rows.front().size());
    for (int k = 0; k < g.n_c; ++k)
        for (int j = 0; j < g.n_v; ++j)
            for (int rep = 0; rep < rows[k][j]; ++rep) g.edges.push_back({k, j});
    g.variable_meta.assign(g.n_v, NodeMeta{"custom", 0, PositionClass::interior});
    g.check_meta.assign(g.n_c, NodeMeta{"custom", 0, PositionClass::interior});
    g.label = "base";
    g.validate();
    return g;
}

inline nlohmann::json to_json(const ConnectionSpec& s) {
    nlohmann::json j;
    j["chains"] = s.chain_lengths;
    auto bridges = nlohmann::json::array();
    for (const BridgeSpec& b : s.bridges)
        bridges.push_back({{"chain_a", b.chain_a},
                           {"attach_a", b.attach_a},
                           {"chain_b", b.chain_b},
                           {"attach_b", b.attach_b},
                           {"length", b.length}});
    j["bridges"] = std::move(bridges);
    j["degree_cap"] = s.degree_cap;
    return j;
}

inline ConnectionSpec connection_spec_from_json(const nlohmann::json& j) {
    ConnectionSpec s;
    s.chain_lengths = j.at("chains").get<std::vector<int>>();
    if (j.contains("bridges"))
        for (const auto& b : j.at("bridges"))
            s.bridges.push_back({b.at("chain_a").get<int>(), b.at("attach_a").get<int>(),
                                 b.at("chain_b").get<int>(), b.at("attach_b").get<int>(),
                                 b.at("length").get<int>()});
    s.degree_cap = j.value("degree_cap", 4);
    return s;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace scldpc
