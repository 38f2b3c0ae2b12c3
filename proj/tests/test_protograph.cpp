#include "scldpc/protograph.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "scldpc/proto_io.hpp"

using namespace scldpc;

namespace {

std::multiset<int> degree_multiset(const std::vector<int>& degrees) {
    return {degrees.begin(), degrees.end()};
}

}  // namespace

TEST_CASE("chain C(3,6,8) matches the terminated degree profile") {
    Protograph g = build_chain(3, 6, 8);
    CHECK(g.n_v == 16);
    CHECK(g.n_c == 10);
    for (int d : g.variable_degrees()) CHECK(d == 3);
    std::multiset<int> want{2, 2, 4, 4, 6, 6, 6, 6, 6, 6};
    CHECK(degree_multiset(g.check_degrees()) == want);
    CHECK(g.connected());
}

TEST_CASE("chain C(3,6,3) is the smallest chain") {
    Protograph g = build_chain(3, 6, 3);
    CHECK(g.n_v == 6);
    CHECK(g.n_c == 5);
    CHECK(g.edges.size() == 18);
    for (int d : g.variable_degrees()) CHECK(d == 3);
}

TEST_CASE("chain rejects unsupported parameters") {
    CHECK_THROWS_AS(build_chain(4, 8, 10), std::invalid_argument);
    CHECK_THROWS_AS(build_chain(3, 6, 2), std::invalid_argument);
}

TEST_CASE("chain design rates") {
    CHECK(design_rate(build_chain(3, 6, 18)) == Rational(16, 36));
    CHECK(design_rate(build_chain(3, 6, 18)).value() == Catch::Approx(0.444).margin(5e-4));
    CHECK(design_rate(build_chain(3, 6, 6)) == Rational(1, 3));
}

TEST_CASE("connected ensemble S(3,6,L) node counts and rate identity") {
    for (int L : {8, 10, 12, 14, 16, 18, 20, 24}) {
        Protograph g = build_connected(L);
        CHECK(g.n_v == 6 * L);
        CHECK(g.n_c == 3 * L + 8);
        Rational r = design_rate(g);
        CHECK(r == Rational(3 * L - 8, 6 * L));
        CHECK(g.connected());
    }
    CHECK(design_rate(build_connected(24)) == Rational(4, 9));
    CHECK(design_rate(build_connected(8)) == Rational(1, 3));
    CHECK(design_rate(build_connected(12)) == Rational(7, 18));
    CHECK(design_rate(build_connected(20)) == Rational(13, 30));
}

TEST_CASE("connected ensemble degree census") {
    Protograph g = build_connected(24);
    auto vd = g.variable_degrees();
    int deg3 = 0, deg4 = 0;
    for (int d : vd) {
        if (d == 3) deg3++;
        else if (d == 4) deg4++;
        else FAIL("unexpected variable degree " << d);
    }
    // Six extra edges per connection, four connections, one per variable.
    CHECK(deg4 == 24);
    CHECK(deg3 == g.n_v - 24);

    auto cd = g.check_degrees();
    std::map<int, int> hist;
    for (int d : cd) hist[d]++;
    // Only the free chain ends keep reduced degrees; all bridge-end checks
    // are completed to degree 6.
    CHECK(hist[2] == 4);
    CHECK(hist[4] == 4);
    CHECK(hist[6] == g.n_c - 8);

    // Handshake.
    size_t vsum = 0, csum = 0;
    for (int d : vd) vsum += d;
    for (int d : cd) csum += d;
    CHECK(vsum == g.edges.size());
    CHECK(csum == g.edges.size());
}

TEST_CASE("connected ensemble rejects bad L") {
    CHECK_THROWS_AS(build_connected(7), std::invalid_argument);
    CHECK_THROWS_AS(build_connected(6), std::invalid_argument);
    CHECK_THROWS_AS(build_connected(9), std::invalid_argument);
}

TEST_CASE("deleting connection edges recovers two bare chains") {
    const int L = 12;
    Protograph g = build_connected(L);
    Protograph chain = build_chain(3, 6, L);
    for (int c = 0; c < 2; ++c) {
        std::string name = "chain" + std::to_string(c);
        // Collect intra-chain edges: both endpoints inside the chain.
        std::vector<int> vars, checks;
        std::map<int, int> vmap, cmap;
        for (int j = 0; j < g.n_v; ++j)
            if (g.variable_meta[j].component == name) {
                vmap[j] = static_cast<int>(vars.size());
                vars.push_back(j);
            }
        for (int k = 0; k < g.n_c; ++k)
            if (g.check_meta[k].component == name) {
                cmap[k] = static_cast<int>(checks.size());
                checks.push_back(k);
            }
        REQUIRE(vars.size() == static_cast<size_t>(chain.n_v));
        REQUIRE(checks.size() == static_cast<size_t>(chain.n_c));
        std::multiset<std::pair<int, int>> sub, ref;
        for (const Edge& e : g.edges)
            if (vmap.count(e.variable) && cmap.count(e.check))
                sub.insert({cmap[e.check], vmap[e.variable]});
        for (const Edge& e : chain.edges) ref.insert({e.check, e.variable});
        CHECK(sub == ref);
    }
}

TEST_CASE("custom spec reproduces the connected ensemble") {
    const int L = 24;
    auto [cl, cr] = connection_points(L);
    ConnectionSpec spec;
    spec.chain_lengths = {L, L};
    spec.bridges = {{0, cl, 1, cl, L / 2}, {0, cr, 1, cr, L / 2}};
    Protograph a = build_custom(spec);
    Protograph b = build_connected(L);
    CHECK(a.n_v == b.n_v);
    CHECK(a.n_c == b.n_c);
    CHECK(a.base_matrix() == b.base_matrix());
}

TEST_CASE("custom spec with one chain and no bridges equals the bare chain") {
    ConnectionSpec spec;
    spec.chain_lengths = {9};
    Protograph a = build_custom(spec);
    Protograph b = build_chain(3, 6, 9);
    CHECK(a.base_matrix() == b.base_matrix());
}

TEST_CASE("custom spec node counts follow the construction rule") {
    // One bridge of length 3 between two chains of length 12: the bridge
    // contributes 2*3 variables and 3+2 checks.
    ConnectionSpec spec;
    spec.chain_lengths = {12, 12};
    spec.bridges = {{0, 3, 1, 3, 3}};
    Protograph g = build_custom(spec);
    CHECK(g.n_v == 2 * 24 + 6);
    CHECK(g.n_c == 2 * 14 + 5);
    // With two such bridges the variable count grows by another 6.
    spec.bridges.push_back({0, 8, 1, 8, 3});
    Protograph g2 = build_custom(spec);
    CHECK(g2.n_v == 2 * 24 + 2 * 6);
    CHECK(g2.connected());
}

TEST_CASE("custom spec rejects collisions and bad segments") {
    ConnectionSpec spec;
    spec.chain_lengths = {12, 12};
    spec.bridges = {{0, 3, 1, 3, 4}, {0, 4, 1, 9, 4}};  // overlapping touch sets on chain 0
    CHECK_THROWS_AS(build_custom(spec), std::invalid_argument);

    ConnectionSpec oor;
    oor.chain_lengths = {12, 12};
    oor.bridges = {{0, 12, 1, 3, 4}};  // window 11..13 runs off a length-12 chain
    CHECK_THROWS_AS(build_custom(oor), std::invalid_argument);
}

TEST_CASE("design rate flags nonpositive rates") {
    Protograph g;
    g.n_v = 2;
    g.n_c = 2;
    g.edges = {{0, 0}, {1, 1}};
    g.variable_meta.assign(2, NodeMeta{});
    g.check_meta.assign(2, NodeMeta{});
    CHECK_THROWS_AS(design_rate(g), std::domain_error);
}

TEST_CASE("json round trip preserves the graph and metadata") {
    Protograph g = build_connected(8);
    nlohmann::json j = to_json(g);
    Protograph h = protograph_from_json(j);
    CHECK(h.n_v == g.n_v);
    CHECK(h.n_c == g.n_c);
    CHECK(h.edges == g.edges);
    CHECK(h.variable_meta == g.variable_meta);
    CHECK(h.check_meta == g.check_meta);
    CHECK(to_json(h) == j);
}

TEST_CASE("base matrix text round trip") {
    Protograph g = build_chain(3, 6, 5);
    std::string text = to_base_matrix_text(g);
    Protograph h = protograph_from_base_matrix_text(text);
    CHECK(h.base_matrix() == g.base_matrix());
    CHECK(to_base_matrix_text(h) == text);
}

TEST_CASE("base matrix text supports parallel edges") {
    std::string text = "3 3\n";
    Protograph g = protograph_from_base_matrix_text(text);
    CHECK(g.n_v == 2);
    CHECK(g.n_c == 1);
    CHECK(g.edges.size() == 6);
    CHECK(to_base_matrix_text(g) == text);
}

TEST_CASE("variable metadata marks connection targets") {
    const int L = 16;
    Protograph g = build_connected(L);
    auto [cl, cr] = connection_points(L);
    std::set<int> touched_segments{cl - 1, cl, cl + 1, cr - 1, cr, cr + 1};
    auto vd = g.variable_degrees();
    for (int j = 0; j < g.n_v; ++j) {
        const NodeMeta& m = g.variable_meta[j];
        if (m.component == "chain0" || m.component == "chain1") {
            bool touched = touched_segments.count(m.segment) > 0;
            CHECK(vd[j] == (touched ? 4 : 3));
            CHECK((m.pos == PositionClass::connection) == touched);
        } else {
            CHECK(vd[j] == 3);
        }
    }
}
