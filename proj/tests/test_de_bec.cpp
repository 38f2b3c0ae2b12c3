#include "scldpc/de_bec.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "scldpc/protograph.hpp"

using namespace scldpc;

namespace {

// Uncoupled (3,6) ensemble as a two-variable protograph with parallel edges.
Protograph uncoupled_36() {
    Protograph g;
    g.n_v = 2;
    g.n_c = 1;
    for (int rep = 0; rep < 3; ++rep) {
        g.edges.push_back({0, 0});
        g.edges.push_back({0, 1});
    }
    g.variable_meta.assign(2, NodeMeta{"base", 1, PositionClass::interior});
    g.check_meta.assign(1, NodeMeta{"base", 1, PositionClass::interior});
    g.label = "(3,6)";
    return g;
}

// Independent scalar recursion for the uncoupled (3,6) ensemble:
// x <- eps * (1 - (1 - x)^5)^2, bit error eps * (1 - (1 - x)^5)^3.
struct Scalar36 {
    double eps;
    double x;
    double q = 0.0;
    explicit Scalar36(double e) : eps(e), x(e) {}
    void step() {
        q = 1.0 - std::pow(1.0 - x, 5);
        x = eps * q * q;
    }
    double pb() const { return eps * q * q * q; }
    bool converges(double target, int max_iter) {
        for (int i = 0; i < max_iter; ++i) {
            step();
            if (pb() < target) return true;
        }
        return false;
    }
};

}  // namespace

TEST_CASE("eps = 0 converges in one iteration with all P_b zero") {
    Protograph g = build_chain(3, 6, 8);
    DeReport r = de_run(g, 0.0, ScheduleConfig{});
    CHECK(r.converged);
    CHECK(r.iterations_run == 1);
    for (double pb : r.pb_final) CHECK(pb == 0.0);
    CHECK(r.i_eff <= 2.0);
}

TEST_CASE("uncoupled (3,6) protograph tracks the scalar recursion exactly") {
    Protograph g = uncoupled_36();
    const double eps = 0.42;
    Scalar36 oracle(eps);

    // Drive the engine one iteration at a time via the trace facility.
    ScheduleConfig sched;
    sched.pb_max = 0.0;  // never converges; we want the raw trajectory
    sched.max_iterations = 50;
    TraceRequest req;
    req.slices = {"base"};
    for (long i = 1; i <= 50; ++i) req.iterations.push_back(i);
    DeReport r = de_run(g, eps, sched, &req);
    REQUIRE(r.trace.size() == 50 * 2);
    for (int i = 0; i < 50; ++i) {
        oracle.step();
        double want = oracle.pb();
        if (want < 1e-20) break;  // denormal tail; relative comparison meaningless
        for (int v = 0; v < 2; ++v) {
            double got = r.trace[2 * i + v].pb;
            CHECK_THAT(got, Catch::Matchers::WithinRel(want, 1e-10));
        }
    }
}

TEST_CASE("uncoupled (3,6) convergence verdicts match the oracle") {
    Protograph g = uncoupled_36();
    ScheduleConfig sched = ScheduleConfig::flooding_config(1e-10);
    for (double eps : {0.40, 0.42, 0.45, 0.48}) {
        bool oracle_verdict = Scalar36(eps).converges(1e-10, sched.max_iterations);
        DeReport r = de_run(g, eps, sched);
        CHECK(r.converged == oracle_verdict);
    }
}

TEST_CASE("uncoupled (3,6) threshold matches the scalar oracle bisection") {
    Protograph g = uncoupled_36();
    ScheduleConfig sched = ScheduleConfig::flooding_config(1e-10);
    double got = threshold_bec(g, sched, 1e-4);

    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-4) {
        double mid = 0.5 * (lo + hi);
        if (Scalar36(mid).converges(1e-10, sched.max_iterations))
            lo = mid;
        else
            hi = mid;
    }
    CHECK_THAT(got, Catch::Matchers::WithinAbs(lo, 2e-4));
    // Known value for the uncoupled (3,6) ensemble.
    CHECK_THAT(got, Catch::Matchers::WithinAbs(0.4294, 1e-3));
}

TEST_CASE("flooding messages are monotone non-increasing") {
    Protograph g = build_connected(8);
    const double eps = 0.45;
    ScheduleConfig sched;
    sched.pb_max = 0.0;
    sched.max_iterations = 60;
    TraceRequest req;
    req.slices = {"chain0", "bridge0"};
    for (long i = 1; i <= 60; ++i) req.iterations.push_back(i);
    DeReport r = de_run(g, eps, sched, &req);
    // Group trace by (slice, position) and check monotone decrease.
    std::map<std::pair<std::string, int>, double> last;
    for (const TracePoint& t : r.trace) {
        auto key = std::make_pair(t.slice, t.position);
        auto it = last.find(key);
        if (it != last.end()) CHECK(t.pb <= it->second + 1e-15);
        last[key] = t.pb;
    }
}

TEST_CASE("degree-2 termination checks dominate iteration 1") {
    // At iteration 1 every q entering from a degree-2 check equals eps, the
    // strongest message in the graph; boundary variables have smaller P_b.
    Protograph g = build_chain(3, 6, 12);
    ScheduleConfig sched;
    sched.pb_max = 0.0;
    sched.max_iterations = 1;
    TraceRequest req{{"chain0"}, {1}};
    DeReport r = de_run(g, 0.5, sched, &req);
    REQUIRE(r.trace.size() == 24);
    double boundary = r.trace.front().pb;
    double mid = r.trace[11].pb;
    CHECK(boundary < mid);
    // Interior symmetry: all mid-chain positions share one value.
    for (int pos = 4; pos < 20; ++pos)
        CHECK_THAT(r.trace[pos].pb, Catch::Matchers::WithinRel(mid, 1e-12));
}

TEST_CASE("chain profile is bell shaped at every traced iteration") {
    Protograph g = build_chain(3, 6, 16);
    ScheduleConfig sched;
    sched.pb_max = 0.0;
    sched.max_iterations = 40;
    std::vector<long> iters{1, 6, 11, 16, 21, 26, 31, 36};
    PbProfile prof = pb_profile(g, 0.46, sched, "chain0", iters);
    REQUIRE(prof.iterations == iters);
    for (const auto& row : prof.pb) {
        size_t n = row.size();
        size_t peak = 0;
        for (size_t i = 1; i < n; ++i)
            if (row[i] > row[peak]) peak = i;
        for (size_t i = 1; i <= peak; ++i) CHECK(row[i] >= row[i - 1] - 1e-12);
        for (size_t i = peak + 1; i < n; ++i) CHECK(row[i] <= row[i - 1] + 1e-12);
    }
}

TEST_CASE("selective schedule with pb_max 0 and theta 0 equals flooding bitwise") {
    Protograph g = build_connected(12);
    const double eps = 0.45;
    ScheduleConfig flood;
    flood.mode = ScheduleConfig::Mode::flooding;
    flood.pb_max = 0.0;
    flood.max_iterations = 30;
    ScheduleConfig sel = flood;
    sel.mode = ScheduleConfig::Mode::selective;
    sel.theta = 0.0;
    TraceRequest req;
    req.slices = {"chain0", "chain1", "bridge0", "bridge1"};
    for (long i = 1; i <= 30; ++i) req.iterations.push_back(i);
    DeReport a = de_run(g, eps, flood, &req);
    DeReport b = de_run(g, eps, sel, &req);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].pb == b.trace[i].pb);
    for (int j = 0; j < g.n_v; ++j) CHECK(a.pb_final[j] == b.pb_final[j]);
}

TEST_CASE("selective schedule applies fewer updates than flooding") {
    Protograph g = build_connected(12);
    const double eps = 0.46;
    DeReport flood = de_run(g, eps, ScheduleConfig::flooding_config(1e-5));
    DeReport sel0 = de_run(g, eps, ScheduleConfig::selective_config(1e-5, 0.0));
    DeReport sel = de_run(g, eps, ScheduleConfig::selective_config(1e-5, 1e-2));
    REQUIRE(flood.converged);
    REQUIRE(sel0.converged);
    REQUIRE(sel.converged);
    CHECK(sel.i_eff <= sel0.i_eff);
    CHECK(sel0.i_eff <= flood.i_eff);
}

TEST_CASE("convergence is monotone in eps on a spot grid") {
    Protograph g = build_connected(8);
    ScheduleConfig sched = ScheduleConfig::flooding_config(1e-8);
    sched.max_iterations = 50000;
    bool prev = true;
    for (double eps : {0.30, 0.45, 0.52, 0.56, 0.58, 0.62, 0.80}) {
        bool now = de_run(g, eps, sched).converged;
        CHECK((prev || !now));  // once divergent, stays divergent
        prev = now;
    }
}

TEST_CASE("ieff sweep reports grid order and divergence as data") {
    Protograph g = build_chain(3, 6, 6);
    std::vector<double> grid{0.0, 0.30, 0.70};
    auto pts = ieff_sweep(g, grid, ScheduleConfig::selective_config());
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].eps == 0.0);
    CHECK(pts[0].converged);
    CHECK(pts[0].i_eff <= 2.0);
    CHECK(pts[1].converged);
    CHECK_FALSE(pts[2].converged);
    CHECK(pts[1].i_eff > pts[0].i_eff);
}

TEST_CASE("unknown slice name is rejected") {
    Protograph g = build_chain(3, 6, 6);
    CHECK_THROWS_AS(pb_profile(g, 0.3, ScheduleConfig{}, "bridge7", {1}), std::invalid_argument);
}
