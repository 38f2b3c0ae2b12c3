#pragma once

// Exact protograph density evolution for the binary erasure channel,
// flooding and selective schedules, threshold bisection, and the
// updates-per-node complexity metric.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "scldpc/protograph.hpp"

namespace scldpc {

struct ScheduleConfig {
    enum class Mode { flooding, selective };
    Mode mode = Mode::flooding;
    double pb_max = 1e-5;          // convergence target for P_b, also skip rule (a)
    double theta = 1e-2;           // update improvement constraint; 0 disables rule (c)
    long max_iterations = 200000;
    double stall_epsilon = 1e-12;  // relative-change floor over the stall window
    int stall_window = 100;

    static ScheduleConfig flooding_config(double pb_target = 1e-10) {
        ScheduleConfig s;
        s.mode = Mode::flooding;
        s.pb_max = pb_target;
        return s;
    }
    static ScheduleConfig selective_config(double pb_max = 1e-5, double theta = 1e-2) {
        ScheduleConfig s;
        s.mode = Mode::selective;
        s.pb_max = pb_max;
        s.theta = theta;
        return s;
    }
};

struct TraceRequest {
    std::vector<std::string> slices;   // component names, e.g. "chain0", "bridge1"
    std::vector<long> iterations;      // ascending iteration indices to snapshot
};

struct TracePoint {
    std::string slice;
    int position = 0;  // 1-based position of the variable node within the slice
    long iteration = 0;
    double pb = 0.0;
};

struct DeReport {
    bool converged = false;
    long iterations_run = 0;
    double i_eff = 0.0;                 // applied updates averaged over all nodes
    std::uint64_t total_updates = 0;
    std::vector<double> pb_final;       // last known P_b per variable node
    std::vector<TracePoint> trace;
};

/// Variable-node indices of one named slice, ordered by segment position.
inline std::vector<int> slice_variables(const Protograph& g, const std::string& slice) {
    std::vector<int> vars;
    for (int j = 0; j < g.n_v; ++j)
        if (g.variable_meta[j].component == slice) vars.push_back(j);
    if (vars.empty()) throw std::invalid_argument("unknown slice name: " + slice);
    std::stable_sort(vars.begin(), vars.end(), [&](int a, int b) {
        return g.variable_meta[a].segment < g.variable_meta[b].segment;
    });
    return vars;
}

namespace detail {

// Edge-instance adjacency in CSR form. Parallel edges are distinct
// instances; exclusion sets drop a single co-edge.
struct EdgeAdjacency {
    int n_v = 0, n_c = 0, n_e = 0;
    std::vector<int> var_off, var_edges;      // per variable: incident edge ids
    std::vector<int> check_off, check_edges;  // per check: incident edge ids
    std::vector<int> edge_var, edge_check;

    explicit EdgeAdjacency(const Protograph& g)
        : n_v(g.n_v), n_c(g.n_c), n_e(static_cast<int>(g.edges.size())) {
        std::vector<int> vd(n_v, 0), cd(n_c, 0);
        for (const Edge& e : g.edges) {
            vd[e.variable]++;
            cd[e.check]++;
        }
        var_off.assign(n_v + 1, 0);
        check_off.assign(n_c + 1, 0);
        for (int j = 0; j < n_v; ++j) var_off[j + 1] = var_off[j] + vd[j];
        for (int k = 0; k < n_c; ++k) check_off[k + 1] = check_off[k] + cd[k];
        var_edges.resize(n_e);
        check_edges.resize(n_e);
        edge_var.resize(n_e);
        edge_check.resize(n_e);
        std::vector<int> vpos(var_off.begin(), var_off.end() - 1);
        std::vector<int> cpos(check_off.begin(), check_off.end() - 1);
        for (int e = 0; e < n_e; ++e) {
            edge_var[e] = g.edges[e].variable;
            edge_check[e] = g.edges[e].check;
            var_edges[vpos[g.edges[e].variable]++] = e;
            check_edges[cpos[g.edges[e].check]++] = e;
        }
    }
};

constexpr int kMaxDegree = 64;
constexpr double kTinyProduct = 1e-12;

}  // namespace detail

/// One density evolution run at erasure probability `eps`.
///
/// Check update: q = 1 - prod(1 - p') over the co-edges; variable update:
/// p = eps * prod q' over the co-edges; P_b = eps * prod over all incident q.
/// Selective mode skips (a) converged variables, (b) nodes whose entire
/// neighborhood was not updated in the preceding iteration, and (c) variable
/// updates whose relative P_b improvement falls below theta (candidates are
/// evaluated, then discarded).
inline DeReport de_run(const Protograph& g, double eps, const ScheduleConfig& sched,
                       const TraceRequest* trace_req = nullptr) {
    if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("eps must be in [0,1]");
    const detail::EdgeAdjacency adj(g);
    const bool selective = sched.mode == ScheduleConfig::Mode::selective;

    std::vector<double> p(adj.n_e, eps), q(adj.n_e, 0.0);
    std::vector<double> pb(adj.n_v, eps);  // channel-only error probability
    std::vector<std::uint8_t> upd_v_prev(adj.n_v, 1), upd_c_prev(adj.n_c, 1);
    std::vector<std::uint8_t> upd_v_cur(adj.n_v, 0), upd_c_cur(adj.n_c, 0);
    std::vector<std::uint64_t> cnt_v(adj.n_v, 0), cnt_c(adj.n_c, 0);

    std::vector<double> pb_window;  // snapshot for the stall heuristic
    DeReport report;

    // Trace bookkeeping. Runs with a trace keep iterating (under the same
    // schedule) until the last requested snapshot even if convergence or a
    // dead state is reached first; the report still describes the first
    // convergence point.
    std::vector<std::pair<std::string, std::vector<int>>> trace_slices;
    size_t next_trace = 0;
    std::vector<long> trace_iters;
    if (trace_req) {
        for (const std::string& s : trace_req->slices)
            trace_slices.emplace_back(s, slice_variables(g, s));
        trace_iters = trace_req->iterations;
        std::sort(trace_iters.begin(), trace_iters.end());
    }
    auto emit_trace = [&](long iter) {
        while (next_trace < trace_iters.size() && trace_iters[next_trace] <= iter) {
            if (trace_iters[next_trace] == iter)
                for (const auto& [name, vars] : trace_slices)
                    for (size_t idx = 0; idx < vars.size(); ++idx)
                        report.trace.push_back(
                            {name, static_cast<int>(idx) + 1, iter, pb[vars[idx]]});
            next_trace++;
        }
    };

    double fwd[detail::kMaxDegree + 1], bwd[detail::kMaxDegree + 1];
    double cand[detail::kMaxDegree];

    bool converged = false;
    long converged_at = 0;
    std::uint64_t updates_at_convergence = 0;
    long iterations_done = 0;

    for (long iter = 1; iter <= sched.max_iterations; ++iter) {
        bool any_commit = false;

        // Check phase: reads p from the previous iteration.
        for (int k = 0; k < adj.n_c; ++k) {
            const int off = adj.check_off[k], deg = adj.check_off[k + 1] - off;
            bool do_update = true;
            if (selective) {
                do_update = false;  // rule (b)
                for (int t = 0; t < deg && !do_update; ++t)
                    do_update = upd_v_prev[adj.edge_var[adj.check_edges[off + t]]] != 0;
            }
            upd_c_cur[k] = do_update ? 1 : 0;
            if (!do_update) continue;
            fwd[0] = 1.0;
            for (int t = 0; t < deg; ++t)
                fwd[t + 1] = fwd[t] * (1.0 - p[adj.check_edges[off + t]]);
            bwd[deg] = 1.0;
            for (int t = deg - 1; t >= 0; --t)
                bwd[t] = bwd[t + 1] * (1.0 - p[adj.check_edges[off + t]]);
            for (int t = 0; t < deg; ++t) {
                double qt = 1.0 - fwd[t] * bwd[t + 1];
                if (qt < detail::kTinyProduct) {
                    // Recompute through logs: 1 - prod survives cancellation.
                    double s = 0.0;
                    for (int u = 0; u < deg; ++u)
                        if (u != t) s += std::log1p(-p[adj.check_edges[off + u]]);
                    qt = -std::expm1(s);
                }
                q[adj.check_edges[off + t]] = qt < 0.0 ? 0.0 : (qt > 1.0 ? 1.0 : qt);
            }
            cnt_c[k]++;
            any_commit = true;
        }

        // Variable phase: reads q from this iteration's check phase.
        for (int j = 0; j < adj.n_v; ++j) {
            const int off = adj.var_off[j], deg = adj.var_off[j + 1] - off;
            if (selective) {
                if (pb[j] < sched.pb_max) {  // rule (a)
                    upd_v_cur[j] = 0;
                    continue;
                }
                bool neighbor_updated = false;  // rule (b)
                for (int t = 0; t < deg && !neighbor_updated; ++t)
                    neighbor_updated = upd_c_prev[adj.edge_check[adj.var_edges[off + t]]] != 0;
                if (!neighbor_updated) {
                    upd_v_cur[j] = 0;
                    continue;
                }
            }
            fwd[0] = 1.0;
            for (int t = 0; t < deg; ++t) fwd[t + 1] = fwd[t] * q[adj.var_edges[off + t]];
            bwd[deg] = 1.0;
            for (int t = deg - 1; t >= 0; --t) bwd[t] = bwd[t + 1] * q[adj.var_edges[off + t]];
            for (int t = 0; t < deg; ++t) cand[t] = eps * fwd[t] * bwd[t + 1];
            const double pb_new = eps * fwd[deg];
            if (selective && sched.theta > 0.0) {  // rule (c)
                const double improvement =
                    pb[j] > 0.0 ? (pb[j] - pb_new) / pb[j]
                                : 0.0;  // an exactly decoded node cannot improve
                if (improvement < sched.theta) {
                    upd_v_cur[j] = 0;
                    continue;
                }
            }
            for (int t = 0; t < deg; ++t) p[adj.var_edges[off + t]] = cand[t];
            pb[j] = pb_new;
            cnt_v[j]++;
            upd_v_cur[j] = 1;
            any_commit = true;
        }

        emit_trace(iter);
        iterations_done = iter;
        const bool tracing_pending = next_trace < trace_iters.size();

        if (!converged) {
            bool all_below = true;
            for (int j = 0; j < adj.n_v && all_below; ++j) all_below = pb[j] < sched.pb_max;
            if (all_below) {
                converged = true;
                converged_at = iter;
                updates_at_convergence = 0;
                for (std::uint64_t c : cnt_v) updates_at_convergence += c;
                for (std::uint64_t c : cnt_c) updates_at_convergence += c;
            }
        }
        if (converged && !tracing_pending) break;

        if (!converged && !tracing_pending) {
            if (selective && !any_commit) break;  // dead state: nothing changes again
            if (iterations_done % sched.stall_window == 0) {
                if (!pb_window.empty()) {
                    double worst = 0.0;
                    for (int j = 0; j < adj.n_v; ++j) {
                        double old = pb_window[j];
                        double rel = old > 0.0 ? std::abs(pb[j] - old) / old
                                               : (pb[j] > 0.0 ? 1.0 : 0.0);
                        if (rel > worst) worst = rel;
                    }
                    if (worst < sched.stall_epsilon) break;  // fixed point above target
                }
                pb_window = pb;
            }
        }

        std::swap(upd_v_prev, upd_v_cur);
        std::swap(upd_c_prev, upd_c_cur);
    }

    report.converged = converged;
    report.iterations_run = converged ? converged_at : iterations_done;
    if (converged) {
        report.total_updates = updates_at_convergence;
    } else {
        std::uint64_t total = 0;
        for (std::uint64_t c : cnt_v) total += c;
        for (std::uint64_t c : cnt_c) total += c;
        report.total_updates = total;
    }
    report.i_eff =
        static_cast<double>(report.total_updates) / static_cast<double>(adj.n_v + adj.n_c);
    report.pb_final = std::move(pb);
    return report;
}

/// Largest erasure probability (within tol) at which de_run converges.
inline double threshold_bec(const Protograph& g, const ScheduleConfig& sched,
                            double tol = 1e-4) {
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
    if (!de_run(g, 0.0, sched).converged)
        throw std::runtime_error("density evolution fails at eps = 0; malformed graph");
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (de_run(g, mid, sched).converged)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

struct SweepPoint {
    double eps = 0.0;
    double i_eff = 0.0;
    bool converged = false;
    long iterations = 0;
};

/// I_eff over a grid of erasure probabilities. Points run in parallel and
/// are reported in input order; non-convergence is data, not an error.
inline std::vector<SweepPoint> ieff_sweep(const Protograph& g,
                                          const std::vector<double>& eps_grid,
                                          const ScheduleConfig& sched) {
    std::vector<SweepPoint> out(eps_grid.size());
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (size_t i = next.fetch_add(1); i < eps_grid.size(); i = next.fetch_add(1)) {
            DeReport r = de_run(g, eps_grid[i], sched);
            out[i] = {eps_grid[i], r.i_eff, r.converged, r.iterations_run};
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return out;
}

struct PbProfile {
    std::string slice;
    std::vector<long> iterations;
    std::vector<std::vector<double>> pb;  // pb[iteration index][position]
};

/// P_b snapshots along one named slice at the requested iterations.
inline PbProfile pb_profile(const Protograph& g, double eps, const ScheduleConfig& sched,
                            const std::string& slice, const std::vector<long>& iterations) {
    for (size_t i = 1; i < iterations.size(); ++i)
        if (iterations[i] <= iterations[i - 1])
            throw std::invalid_argument("iteration list must be ascending");
    TraceRequest req{{slice}, iterations};
    ScheduleConfig run = sched;
    run.max_iterations = std::max(run.max_iterations,
                                  iterations.empty() ? 0L : iterations.back());
    DeReport r = de_run(g, eps, run, &req);
    PbProfile prof;
    prof.slice = slice;
    size_t n_pos = slice_variables(g, slice).size();
    for (const TracePoint& t : r.trace) {
        if (prof.iterations.empty() || prof.iterations.back() != t.iteration) {
            prof.iterations.push_back(t.iteration);
            prof.pb.emplace_back();
        }
        prof.pb.back().push_back(t.pb);
    }
    for (const auto& row : prof.pb)
        if (row.size() != n_pos) throw std::runtime_error("trace row size mismatch");
    return prof;
}

}  // namespace scldpc
