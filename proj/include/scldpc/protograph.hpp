#pragma once

// Protograph construction for spatially coupled LDPC chains and
// connected-chain ensembles built from (3,6)-regular segments.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace scldpc {

enum class NodeKind { variable, check };

enum class PositionClass { interior, termination, connection };

inline const char* to_string(PositionClass c) {
    switch (c) {
        case PositionClass::interior: return "interior";
        case PositionClass::termination: return "termination";
        case PositionClass::connection: return "connection";
    }
    return "?";
}

inline PositionClass position_class_from_string(const std::string& s) {
    if (s == "interior") return PositionClass::interior;
    if (s == "termination") return PositionClass::termination;
    if (s == "connection") return PositionClass::connection;
    throw std::invalid_argument("unknown position class: " + s);
}

struct NodeMeta {
    std::string component;  // "chain0", "bridge1", "custom", ...
    int segment = 0;        // 1-based segment position; chain checks use 0..L+1
    PositionClass pos = PositionClass::interior;

    bool operator==(const NodeMeta&) const = default;
};

struct Edge {
    int check = 0;
    int variable = 0;

    bool operator==(const Edge&) const = default;
};

/// Exact reduced fraction; design rates are small-integer rationals.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("zero denominator");
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

/// Bipartite multigraph template. Parallel edges are stored as repeated
/// (check, variable) pairs; the base matrix entry counts them.
struct Protograph {
    int n_v = 0;
    int n_c = 0;
    std::vector<Edge> edges;
    std::vector<NodeMeta> variable_meta;  // size n_v
    std::vector<NodeMeta> check_meta;     // size n_c
    std::string label;

    std::vector<std::vector<int>> base_matrix() const {
        std::vector<std::vector<int>> b(n_c, std::vector<int>(n_v, 0));
        for (const Edge& e : edges) b[e.check][e.variable]++;
        return b;
    }

    std::vector<int> variable_degrees() const {
        std::vector<int> d(n_v, 0);
        for (const Edge& e : edges) d[e.variable]++;
        return d;
    }

    std::vector<int> check_degrees() const {
        std::vector<int> d(n_c, 0);
        for (const Edge& e : edges) d[e.check]++;
        return d;
    }

    bool connected() const {
        if (n_v + n_c == 0) return true;
        // BFS over the bipartite graph; variables 0..n_v-1, checks n_v..n_v+n_c-1.
        std::vector<std::vector<int>> adj(n_v + n_c);
        for (const Edge& e : edges) {
            adj[e.variable].push_back(n_v + e.check);
            adj[n_v + e.check].push_back(e.variable);
        }
        std::vector<char> seen(n_v + n_c, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int w : adj[u])
                if (!seen[w]) {
                    seen[w] = 1;
                    count++;
                    stack.push_back(w);
                }
        }
        return count == n_v + n_c;
    }

    void validate() const {
        if (n_v <= 0 || n_c <= 0) throw std::invalid_argument("empty protograph");
        if (static_cast<int>(variable_meta.size()) != n_v ||
            static_cast<int>(check_meta.size()) != n_c)
            throw std::invalid_argument("node metadata size mismatch");
        for (const Edge& e : edges) {
            if (e.check < 0 || e.check >= n_c || e.variable < 0 || e.variable >= n_v)
                throw std::invalid_argument("edge endpoint out of range");
        }
    }
};

/// (n_v - n_c) / n_v as an exact rational.
inline Rational design_rate(const Protograph& g) {
    if (g.n_c >= g.n_v) throw std::domain_error("nonpositive design rate");
    return Rational(g.n_v - g.n_c, g.n_v);
}

namespace detail {

// Appends one terminated coupled chain of `length` segments to `out`.
// Segment t (1-based) contributes two variable nodes and connects them to
// checks t-1, t, t+1 of the chain's own L+2 checks. Returns the offsets of
// the chain's first variable and first check.
struct ChainOffsets {
    int var0 = 0;
    int check0 = 0;
};

inline ChainOffsets append_chain(Protograph& out, int length, const std::string& component) {
    ChainOffsets off{out.n_v, out.n_c};
    out.n_v += 2 * length;
    out.n_c += length + 2;
    for (int t = 1; t <= length; ++t) {
        for (int dup = 0; dup < 2; ++dup) {
            int v = off.var0 + 2 * (t - 1) + dup;
            for (int c : {t - 1, t, t + 1}) out.edges.push_back({off.check0 + c, v});
            out.variable_meta.push_back({component, t, PositionClass::interior});
        }
    }
    for (int c = 0; c <= length + 1; ++c) {
        PositionClass pos = (c <= 1 || c >= length)
                                ? PositionClass::termination
                                : PositionClass::interior;
        out.check_meta.push_back({component, c, pos});
    }
    return off;
}

}  // namespace detail

/// Terminated coupled chain C(J,K,L). Only (J,K) = (3,6) is supported.
inline Protograph build_chain(int j, int k, int length) {
    if (j != 3 || k != 6)
        throw std::invalid_argument("unsupported (J,K); only (3,6) is implemented");
    if (length < 3) throw std::invalid_argument("chain length must be >= 3");
    Protograph g;
    detail::append_chain(g, length, "chain0");
    g.label = "C(3,6," + std::to_string(length) + ")";
    g.validate();
    return g;
}

struct BridgeSpec {
    int chain_a = 0;
    int attach_a = 0;  // 1-based segment on chain_a; touches attach_a .. attach_a+2
    int chain_b = 1;
    int attach_b = 0;
    int length = 0;

    bool operator==(const BridgeSpec&) const = default;
};

struct ConnectionSpec {
    std::vector<int> chain_lengths;
    std::vector<BridgeSpec> bridges;
    int degree_cap = 4;

    bool operator==(const ConnectionSpec&) const = default;
};

/// General chain-plus-bridge layout. Each bridge is itself a terminated
/// coupled chain; the two low-degree terminal checks at each end are
/// completed to degree 6 with extra edges into the adjacent chain. With c
/// the attachment segment, the degree-2 check takes the four variables of
/// segments c-1 and c+1 and the degree-4 check the two variables of
/// segment c, so the touched window is centered on the attachment point.
/// Every touched chain variable gains exactly one edge.
inline Protograph build_custom(const ConnectionSpec& spec) {
    if (spec.chain_lengths.empty()) throw std::invalid_argument("no chains given");
    for (int L : spec.chain_lengths)
        if (L < 3) throw std::invalid_argument("chain length must be >= 3");

    Protograph g;
    std::vector<detail::ChainOffsets> chain_off;
    for (size_t i = 0; i < spec.chain_lengths.size(); ++i)
        chain_off.push_back(detail::append_chain(g, spec.chain_lengths[i],
                                                 "chain" + std::to_string(i)));
    std::vector<detail::ChainOffsets> bridge_off;
    for (size_t i = 0; i < spec.bridges.size(); ++i) {
        if (spec.bridges[i].length < 3)
            throw std::invalid_argument("bridge length must be >= 3");
        bridge_off.push_back(detail::append_chain(g, spec.bridges[i].length,
                                                  "bridge" + std::to_string(i)));
    }

    std::vector<int> degree(g.n_v, 3);
    auto attach_end = [&](int bridge_idx, int deg2_check, int deg4_check, int chain,
                          int seg) {
        int L = spec.chain_lengths[chain];
        if (seg < 2 || seg + 1 > L)
            throw std::invalid_argument("attachment segment out of range");
        const detail::ChainOffsets& co = chain_off[chain];
        const detail::ChainOffsets& bo = bridge_off[bridge_idx];
        auto seg_vars = [&](int t) {
            return std::pair<int, int>{co.var0 + 2 * (t - 1), co.var0 + 2 * (t - 1) + 1};
        };
        auto touch = [&](int check, int var) {
            if (degree[var] + 1 > spec.degree_cap)
                throw std::invalid_argument("attachment exceeds variable degree cap");
            degree[var]++;
            g.edges.push_back({bo.check0 + check, var});
            g.variable_meta[var].pos = PositionClass::connection;
        };
        for (int t : {seg - 1, seg + 1}) {
            auto [a, b] = seg_vars(t);
            touch(deg2_check, a);
            touch(deg2_check, b);
        }
        auto [a, b] = seg_vars(seg);
        touch(deg4_check, a);
        touch(deg4_check, b);
        g.check_meta[bo.check0 + deg2_check].pos = PositionClass::connection;
        g.check_meta[bo.check0 + deg4_check].pos = PositionClass::connection;
    };

    for (size_t i = 0; i < spec.bridges.size(); ++i) {
        const BridgeSpec& b = spec.bridges[i];
        int nc = static_cast<int>(spec.chain_lengths.size());
        if (b.chain_a < 0 || b.chain_a >= nc || b.chain_b < 0 || b.chain_b >= nc)
            throw std::invalid_argument("bridge chain index out of range");
        int Lb = b.length;
        // Top end of the bridge: checks 0 (degree 2) and 1 (degree 4).
        attach_end(static_cast<int>(i), 0, 1, b.chain_a, b.attach_a);
        // Bottom end: checks Lb+1 (degree 2) and Lb (degree 4).
        attach_end(static_cast<int>(i), Lb + 1, Lb, b.chain_b, b.attach_b);
    }

    g.label = "custom";
    g.validate();
    return g;
}

/// Connection points for S(3,6,L): segment floor(L/4) counted from the
/// left end for the left bridge and from the right end for the right
/// bridge. Each bridge touches the segment window centered there.
inline std::pair<int, int> connection_points(int length) {
    int c = length / 4;
    return {c, length + 1 - c};
}

/// Connected ensemble S(3,6,L): two chains of length L joined by two
/// bridges of length L/2.
inline Protograph build_connected(int length) {
    if (length < 8 || length % 2 != 0)
        throw std::invalid_argument("connected ensemble requires even L >= 8");
    auto [c_left, c_right] = connection_points(length);
    ConnectionSpec spec;
    spec.chain_lengths = {length, length};
    spec.bridges = {{0, c_left, 1, c_left, length / 2},
                    {0, c_right, 1, c_right, length / 2}};
    Protograph g = build_custom(spec);
    g.label = "S(3,6," + std::to_string(length) + ")";
    return g;
}

}  // namespace scldpc
