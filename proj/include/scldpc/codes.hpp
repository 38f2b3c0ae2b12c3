#pragma once

// Lifting protographs to finite parity-check matrices, alist interchange,
// and Monte Carlo BEC verification with a peeling decoder.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scldpc/protograph.hpp"

namespace scldpc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

enum class LiftMode { random_permutation, circulant };

/// Sparse binary parity-check matrix obtained by M-lifting a protograph.
/// Block (k,j) is a sum of B[k][j] non-overlapping M x M permutation
/// matrices; provenance keeps the permutation of every protograph edge.
struct LiftedCode {
    int m = 0;
    long n_rows = 0, n_cols = 0;
    std::vector<std::vector<int>> row_cols;  // sorted column indices per row
    std::vector<std::vector<int>> col_rows;  // sorted row indices per column
    LiftMode mode = LiftMode::random_permutation;
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> edge_perm;  // per protograph edge: r -> pi(r)

    long edge_count() const {
        long e = 0;
        for (const auto& r : row_cols) e += static_cast<long>(r.size());
        return e;
    }
};

/// Deterministic M-fold lift. Every protograph edge instance receives its
/// own permutation; permutations of parallel edges within one (check,
/// variable) block are resampled until disjoint so the lifted matrix stays
/// binary. Circulant mode draws distinct shifts per block instead.
inline LiftedCode lift(const Protograph& g, int m, LiftMode mode, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("lifting factor must be >= 1");
    g.validate();
    const int n_e = static_cast<int>(g.edges.size());

    // Group parallel edges by (check, variable) block.
    std::vector<std::vector<int>> block_edges;
    {
        std::vector<std::vector<int>> seen(static_cast<size_t>(g.n_c),
                                           std::vector<int>(g.n_v, -1));
        for (int e = 0; e < n_e; ++e) {
            int& slot = seen[g.edges[e].check][g.edges[e].variable];
            if (slot < 0) {
                slot = static_cast<int>(block_edges.size());
                block_edges.emplace_back();
            }
            block_edges[slot].push_back(e);
        }
    }

    LiftedCode code;
    code.m = m;
    code.n_rows = static_cast<long>(g.n_c) * m;
    code.n_cols = static_cast<long>(g.n_v) * m;
    code.mode = mode;
    code.seed = seed;
    code.edge_perm.assign(n_e, {});

    std::mt19937_64 rng(detail::splitmix64(seed));
    for (const auto& block : block_edges) {
        const int mult = static_cast<int>(block.size());
        if (mult > m)
            throw std::invalid_argument("edge multiplicity exceeds lifting factor");
        if (mode == LiftMode::circulant) {
            // Distinct shifts within a block; a repeated shift would overlap.
            std::vector<int> shifts;
            std::uniform_int_distribution<int> dist(0, m - 1);
            while (static_cast<int>(shifts.size()) < mult) {
                int s = dist(rng);
                if (std::find(shifts.begin(), shifts.end(), s) == shifts.end())
                    shifts.push_back(s);
            }
            for (int i = 0; i < mult; ++i) {
                std::vector<int> perm(m);
                for (int r = 0; r < m; ++r) perm[r] = (r + shifts[i]) % m;
                code.edge_perm[block[i]] = std::move(perm);
            }
        } else {
            // Fisher-Yates per edge; reject a permutation that collides with
            // an earlier one of the same block in any row.
            std::vector<std::vector<int>> perms;
            int attempts = 0;
            while (static_cast<int>(perms.size()) < mult) {
                std::vector<int> perm(m);
                std::iota(perm.begin(), perm.end(), 0);
                for (int r = m - 1; r > 0; --r) {
                    std::uniform_int_distribution<int> dist(0, r);
                    std::swap(perm[r], perm[dist(rng)]);
                }
                bool collides = false;
                for (const auto& prev : perms)
                    for (int r = 0; r < m && !collides; ++r) collides = prev[r] == perm[r];
                if (!collides)
                    perms.push_back(std::move(perm));
                else if (++attempts > 1000 * mult)
                    throw std::runtime_error("cannot find disjoint permutations");
            }
            for (int i = 0; i < mult; ++i) code.edge_perm[block[i]] = std::move(perms[i]);
        }
    }

    code.row_cols.assign(static_cast<size_t>(code.n_rows), {});
    code.col_rows.assign(static_cast<size_t>(code.n_cols), {});
    for (int e = 0; e < n_e; ++e) {
        const long row0 = static_cast<long>(g.edges[e].check) * m;
        const long col0 = static_cast<long>(g.edges[e].variable) * m;
        for (int r = 0; r < m; ++r) {
            long row = row0 + r, col = col0 + code.edge_perm[e][r];
            code.row_cols[row].push_back(static_cast<int>(col));
            code.col_rows[col].push_back(static_cast<int>(row));
        }
    }
    for (auto& v : code.row_cols) std::sort(v.begin(), v.end());
    for (auto& v : code.col_rows) std::sort(v.begin(), v.end());
    return code;
}

/// alist text form: "n_cols n_rows", max weights, per-column weights,
/// per-row weights, per-column 1-based row indices padded with zeros,
/// per-row column indices padded with zeros.
inline std::string to_alist(const LiftedCode& c) {
    std::ostringstream os;
    size_t wc = 0, wr = 0;
    for (const auto& v : c.col_rows) wc = std::max(wc, v.size());
    for (const auto& v : c.row_cols) wr = std::max(wr, v.size());
    os << c.n_cols << ' ' << c.n_rows << '\n' << wc << ' ' << wr << '\n';
    for (size_t j = 0; j < c.col_rows.size(); ++j)
        os << c.col_rows[j].size() << (j + 1 < c.col_rows.size() ? ' ' : '\n');
    for (size_t k = 0; k < c.row_cols.size(); ++k)
        os << c.row_cols[k].size() << (k + 1 < c.row_cols.size() ? ' ' : '\n');
    for (const auto& v : c.col_rows) {
        for (size_t t = 0; t < wc; ++t)
            os << (t < v.size() ? v[t] + 1 : 0) << (t + 1 < wc ? ' ' : '\n');
    }
    for (const auto& v : c.row_cols) {
        for (size_t t = 0; t < wr; ++t)
            os << (t < v.size() ? v[t] + 1 : 0) << (t + 1 < wr ? ' ' : '\n');
    }
    return os.str();
}

inline LiftedCode from_alist(const std::string& text) {
    std::istringstream is(text);
    long n_cols = 0, n_rows = 0, wc = 0, wr = 0;
    if (!(is >> n_cols >> n_rows >> wc >> wr) || n_cols <= 0 || n_rows <= 0)
        throw std::invalid_argument("malformed alist header");
    std::vector<long> cw(n_cols), rw(n_rows);
    for (auto& x : cw) is >> x;
    for (auto& x : rw) is >> x;
    LiftedCode c;
    c.m = 0;  // provenance unknown
    c.n_cols = n_cols;
    c.n_rows = n_rows;
    c.col_rows.assign(n_cols, {});
    c.row_cols.assign(n_rows, {});
    for (long j = 0; j < n_cols; ++j)
        for (long t = 0; t < wc; ++t) {
            long r;
            if (!(is >> r)) throw std::invalid_argument("truncated alist column lists");
            if (t < cw[j]) {
                if (r < 1 || r > n_rows) throw std::invalid_argument("alist row index range");
                c.col_rows[j].push_back(static_cast<int>(r - 1));
            }
        }
    for (long k = 0; k < n_rows; ++k)
        for (long t = 0; t < wr; ++t) {
            long v;
            if (!(is >> v)) throw std::invalid_argument("truncated alist row lists");
            if (t < rw[k]) {
                if (v < 1 || v > n_cols) throw std::invalid_argument("alist col index range");
                c.row_cols[k].push_back(static_cast<int>(v - 1));
            }
        }
    for (auto& v : c.row_cols) std::sort(v.begin(), v.end());
    for (auto& v : c.col_rows) std::sort(v.begin(), v.end());
    return c;
}

struct SimResult {
    double eps = 0.0;
    int m = 0;
    long trials = 0;
    double ber = 0.0;  // residual erasure rate over all bits and trials
    double fer = 0.0;
    double ber_ci_low = 0.0, ber_ci_high = 0.0;  // Wilson, pooled bits
    double fer_ci_low = 0.0, fer_ci_high = 0.0;  // Wilson, frames
    long frame_errors = 0;
    std::uint64_t residual_bits = 0;
};

namespace detail {

struct Wilson {
    double low, high;
};

inline Wilson wilson_interval(double successes, double n, double z = 1.96) {
    if (n <= 0) return {0.0, 1.0};
    double phat = successes / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Peeling to the fixed point: repeatedly resolve erased bits that are the
// unique erased neighbor of some check. Returns unresolved erasure count.
// The resolution order does not affect the fixed point; an rng, when
// given, randomizes it to let tests confirm that.
inline long peel(const LiftedCode& c, std::vector<std::uint8_t>& erased,
                 std::mt19937_64* order_rng = nullptr) {
    std::vector<int> erased_count(c.n_rows, 0);
    long unresolved = 0;
    for (long j = 0; j < c.n_cols; ++j)
        if (erased[j]) {
            unresolved++;
            for (int r : c.col_rows[j]) erased_count[r]++;
        }
    std::vector<long> stack;
    for (long k = 0; k < c.n_rows; ++k)
        if (erased_count[k] == 1) stack.push_back(k);
    while (!stack.empty()) {
        size_t pick = stack.size() - 1;
        if (order_rng)
            pick = std::uniform_int_distribution<size_t>(0, stack.size() - 1)(*order_rng);
        long k = stack[pick];
        stack[pick] = stack.back();
        stack.pop_back();
        if (erased_count[k] != 1) continue;  // stale entry
        long bit = -1;
        for (int j : c.row_cols[k])
            if (erased[j]) {
                bit = j;
                break;
            }
        if (bit < 0) continue;
        erased[bit] = 0;
        unresolved--;
        for (int r : c.col_rows[bit]) {
            if (--erased_count[r] == 1) stack.push_back(r);
        }
    }
    return unresolved;
}

}  // namespace detail

/// Monte Carlo BEC simulation of a lifted code under peeling (equivalent to
/// belief propagation on the erasure channel). All-zero codeword; erasures
/// i.i.d.; per-trial rngs derived from (seed, trial) so aggregates do not
/// depend on execution order.
inline SimResult simulate_bec(const LiftedCode& c, double eps, long trials,
                              std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("eps must be in [0,1]");
    SimResult res;
    res.eps = eps;
    res.m = c.m;
    res.trials = trials;
    std::vector<std::uint8_t> erased(c.n_cols);
    for (long t = 0; t < trials; ++t) {
        std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(t) + 1)));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (long j = 0; j < c.n_cols; ++j) erased[j] = u(rng) < eps ? 1 : 0;
        long unresolved = detail::peel(c, erased);
        res.residual_bits += static_cast<std::uint64_t>(unresolved);
        if (unresolved > 0) res.frame_errors++;
    }
    const double nbits = static_cast<double>(c.n_cols) * static_cast<double>(trials);
    res.ber = static_cast<double>(res.residual_bits) / nbits;
    res.fer = static_cast<double>(res.frame_errors) / static_cast<double>(trials);
    auto bci = detail::wilson_interval(static_cast<double>(res.residual_bits), nbits);
    auto fci = detail::wilson_interval(static_cast<double>(res.frame_errors),
                                       static_cast<double>(trials));
    res.ber_ci_low = bci.low;
    res.ber_ci_high = bci.high;
    res.fer_ci_low = fci.low;
    res.fer_ci_high = fci.high;
    return res;
}

}  // namespace scldpc
