#pragma once

// Ensemble average weight enumerator: asymptotic spectral shape r(delta)
// and the minimum distance growth rate delta_min.
//
// r(delta) = (1/n_v) max over per-variable weight fractions d_j of
//   sum_checks a_c - sum_j (deg_j - 1) H(d_j),  (1/n_v) sum d_j = delta,
// where H is the natural-log binary entropy and a_c is the saddle-point
// exponent of the even-weight configuration count of check c:
//   a_c = inf_{x>0} [ ln g_c(x) - sum_e d_e ln x_e ],
//   g_c(x) = (prod_e (1+x_e) + prod_e (1-x_e)) / 2.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "scldpc/protograph.hpp"

namespace scldpc {

namespace detail {

#ifdef SCLDPC_PROFILE
inline std::atomic<long> g_eval_count{0}, g_newton_iters{0}, g_solve_calls{0},
    g_phi_evals{0};
#endif

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

// d/dx H(x), clamped at the boundary.
inline double binary_entropy_deriv(double x) {
    const double lo = 1e-12;
    x = std::min(std::max(x, lo), 1.0 - lo);
    return std::log((1.0 - x) / x);
}

// Saddle-point exponent of one parity check: minimizes
//   phi(y) = ln g(e^y) - sum_e delta_e y_e
// over y, g(x) = (prod(1+x_e) + sigma * prod(1-x_e)) / 2. Damped Newton;
// warm started. Returns the value; y holds the minimizer; grad_out gets
// d a / d delta_e = -y_e. Infeasible weight profiles return -inf.
//
// Stationarity is judged relative to each delta_e (the gradient components
// u_e - delta_e live on the delta scale, which spans many decades when the
// outer optimizer parks groups near the box boundary).
struct CheckSolver {
    int k = 0;
    std::vector<double> y;  // warm start across calls
    double last_residual = 0.0;
    bool last_converged = true;

    double solve(const std::vector<double>& delta_in, int sigma_in,
                 std::vector<double>& grad_out) {
        const int n = static_cast<int>(delta_in.size());
        grad_out.assign(n, 0.0);
        last_residual = 0.0;
        last_converged = true;

        // Reduce exact-zero and exact-one fractions.
        std::vector<int> active;
        std::vector<double> d;
        int sigma = sigma_in;
        for (int e = 0; e < n; ++e) {
            if (delta_in[e] <= 0.0) {
                grad_out[e] = 0.0;  // filled by caller through clamped deltas
            } else if (delta_in[e] >= 1.0) {
                sigma = -sigma;
                grad_out[e] = 0.0;
            } else {
                active.push_back(e);
                d.push_back(delta_in[e]);
            }
        }
        const int k_eff = static_cast<int>(active.size());
        if (k_eff == 0) return sigma > 0 ? 0.0 : kNegInf;
        if (k_eff == 1) return kNegInf;  // single fractional column cannot have even rows
        if (k_eff == 2) {
            // g = 1 + sigma * x1 x2 up to the parity sign; feasible only on a line.
            if (sigma > 0) {
                if (std::abs(d[0] - d[1]) > 1e-9) return kNegInf;
                double dd = 0.5 * (d[0] + d[1]);
                double halfgrad = -0.5 * std::log(dd / (1.0 - dd));
                grad_out[active[0]] = grad_out[active[1]] = halfgrad;
                return binary_entropy(dd);
            }
            if (std::abs(d[0] + d[1] - 1.0) > 1e-9) return kNegInf;
            grad_out[active[0]] = -0.5 * std::log(d[0] / (1.0 - d[0]));
            grad_out[active[1]] = -0.5 * std::log(d[1] / (1.0 - d[1]));
            return binary_entropy(d[0]);
        }

        // The exponent is finite only for profiles inside the parity
        // polytope conv{even-weight 0/1 patterns}; its facets are indexed
        // by odd subsets S: sum_S d - sum_!S d <= |S| - 1. Outside (or on)
        // a facet the infimum runs away to -inf, so reject up front.
        for (int mask = 1; mask < (1 << k_eff); ++mask) {
            int bits = __builtin_popcount(static_cast<unsigned>(mask));
            if (bits % 2 == 0) continue;
            double lhs = 0.0;
            for (int e = 0; e < k_eff; ++e) lhs += (mask >> e) & 1 ? d[e] : -d[e];
            if (lhs >= bits - 1 - 1e-12) return kNegInf;
        }

        if (static_cast<int>(y.size()) != k_eff || !last_converged_prev_) {
            // Scale-aware start: in the small-x regime u_e ~ x_e * sum x_f,
            // so x_e ~ sqrt(delta) puts every coordinate in range.
            y.resize(k_eff);
            for (int e = 0; e < k_eff; ++e)
                y[e] = std::min(0.0, 0.5 * std::log(d[e]));
        }
        std::vector<double> x(k_eff), grad(k_eff), dy(k_eff);
        std::vector<double> hess(k_eff * k_eff);
        std::vector<double> fp(k_eff + 1), bp(k_eff + 1), fm(k_eff + 1), bm(k_eff + 1);

        auto phi_of = [&](const std::vector<double>& yy) {
            double lp = 0.0, lin = 0.0;
            double pm = 1.0;
            bool huge = false;
            for (int e = 0; e < k_eff; ++e) {
                if (yy[e] > 300.0) huge = true;
                lin += d[e] * yy[e];
            }
            if (huge) {
                // Evaluate through logs to dodge overflow on wild line-search points.
                double la = 0.0;
                for (int e = 0; e < k_eff; ++e) la += yy[e] > 40 ? yy[e] : std::log1p(std::exp(yy[e]));
                return la - std::log(2.0) - lin;  // minus-product term negligible
            }
            for (int e = 0; e < k_eff; ++e) {
                double xe = std::exp(yy[e]);
                lp += std::log1p(xe);
                pm *= 1.0 - xe;
            }
            double a = std::exp(lp);
            double gg = 0.5 * (a + sigma * pm);
            if (!(gg > 0.0)) return std::numeric_limits<double>::infinity();
            return std::log(gg) - lin;
        };

        double phi = phi_of(y);
        bool converged = false;
        double rel_residual = std::numeric_limits<double>::infinity();
#ifdef SCLDPC_PROFILE
        g_solve_calls++;
#endif
        for (int it = 0; it < 80 && !converged; ++it) {
#ifdef SCLDPC_PROFILE
            g_newton_iters++;
#endif
            for (int e = 0; e < k_eff; ++e) x[e] = std::exp(y[e]);
            fp[0] = bm[k_eff] = fm[0] = bp[k_eff] = 1.0;
            for (int e = 0; e < k_eff; ++e) {
                fp[e + 1] = fp[e] * (1.0 + x[e]);
                fm[e + 1] = fm[e] * (1.0 - x[e]);
            }
            for (int e = k_eff - 1; e >= 0; --e) {
                bp[e] = bp[e + 1] * (1.0 + x[e]);
                bm[e] = bm[e + 1] * (1.0 - x[e]);
            }
            const double A = fp[k_eff], B = fm[k_eff];
            const double g = 0.5 * (A + sigma * B);
            if (!(g > 0.0) || !std::isfinite(g)) return kNegInf;
            std::vector<double> u(k_eff);
            rel_residual = 0.0;
            for (int e = 0; e < k_eff; ++e) {
                double Ae = fp[e] * bp[e + 1];
                double Be = fm[e] * bm[e + 1];
                u[e] = x[e] * 0.5 * (Ae - sigma * Be) / g;
                grad[e] = u[e] - d[e];
                // Relative residual for moderate fractions, absolute scale
                // below 1e-4 where phi differences dip under double
                // resolution long before a relative 1e-9 is reachable.
                rel_residual =
                    std::max(rel_residual, std::abs(grad[e]) / std::max(d[e], 1e-4));
            }
            if (rel_residual < 1e-8) {
                converged = true;
                break;
            }
            for (int e = 0; e < k_eff; ++e)
                for (int f = 0; f < k_eff; ++f) {
                    if (e == f) {
                        hess[e * k_eff + e] = u[e] - u[e] * u[e];
                    } else {
                        double Aef = 1.0, Bef = 1.0;
                        for (int h = 0; h < k_eff; ++h) {
                            if (h == e || h == f) continue;
                            Aef *= 1.0 + x[h];
                            Bef *= 1.0 - x[h];
                        }
                        hess[e * k_eff + f] =
                            x[e] * x[f] * 0.5 * (Aef + sigma * Bef) / g - u[e] * u[f];
                    }
                }
            // Cholesky with ridge fallback.
            double ridge = 0.0;
            bool solved = false;
            for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
                std::vector<double> chol(hess);
                for (int e = 0; e < k_eff; ++e) chol[e * k_eff + e] += ridge;
                solved = true;
                for (int c = 0; c < k_eff && solved; ++c) {
                    for (int r = c; r < k_eff; ++r) {
                        double s = chol[r * k_eff + c];
                        for (int t = 0; t < c; ++t)
                            s -= chol[r * k_eff + t] * chol[c * k_eff + t];
                        if (r == c) {
                            if (s <= 1e-300) {
                                solved = false;
                                break;
                            }
                            chol[c * k_eff + c] = std::sqrt(s);
                        } else {
                            chol[r * k_eff + c] = s / chol[c * k_eff + c];
                        }
                    }
                }
                if (!solved) {
                    ridge = ridge == 0.0 ? 1e-10 : ridge * 100.0;
                    continue;
                }
                for (int r = 0; r < k_eff; ++r) {
                    double s = -grad[r];
                    for (int t = 0; t < r; ++t) s -= chol[r * k_eff + t] * dy[t];
                    dy[r] = s / chol[r * k_eff + r];
                }
                for (int r = k_eff - 1; r >= 0; --r) {
                    double s = dy[r];
                    for (int t = r + 1; t < k_eff; ++t) s -= chol[t * k_eff + r] * dy[t];
                    dy[r] = s / chol[r * k_eff + r];
                }
            }
            if (!solved)
                for (int e = 0; e < k_eff; ++e) dy[e] = -grad[e];  // gradient fallback
            double slope = 0.0;
            for (int e = 0; e < k_eff; ++e) slope += grad[e] * dy[e];
            if (slope > 0.0) {
                for (int e = 0; e < k_eff; ++e) dy[e] = -grad[e];
                slope = 0.0;
                for (int e = 0; e < k_eff; ++e) slope -= grad[e] * grad[e];
            }
            double t = 1.0;
            std::vector<double> ytrial(k_eff);
            bool stepped = false;
            while (t >= 1e-14) {
                for (int e = 0; e < k_eff; ++e) ytrial[e] = y[e] + t * dy[e];
                double pt = phi_of(ytrial);
                if (pt <= phi + 1e-4 * t * slope) {
                    y = ytrial;
                    phi = pt;
                    stepped = true;
                    break;
                }
                t *= 0.5;
            }
            if (!stepped) break;
            double ymax = 0.0;
            for (int e = 0; e < k_eff; ++e) ymax = std::max(ymax, std::abs(y[e]));
            if (ymax > 120.0) return kNegInf;  // running off to an infeasible profile
        }
        last_residual = rel_residual;
        last_converged = converged;
        last_converged_prev_ = converged;
        if (!converged && rel_residual > 1e-2) return kNegInf;  // do not trust phi here
        for (int e = 0; e < k_eff; ++e) grad_out[active[e]] = -y[e];
        return phi;
    }

  private:
    bool last_converged_prev_ = true;
};

}  // namespace detail

struct SpectralShapeResult {
    double delta = 0.0;
    double r = 0.0;
    bool feasible = true;
    double residual = 0.0;  // outer projected-gradient norm at the best point
};

struct GrowthRatePoint {
    double delta = 0.0;
    double r = 0.0;
};

struct GrowthRateResult {
    bool found = false;
    double delta_min = 0.0;
    std::vector<GrowthRatePoint> scan;
};

/// Spectral shape evaluator. Variables linked through degree-2 checks carry
/// equal weight fractions at any finite exponent, so they are merged into
/// groups ahead of the optimization; degree-2 checks then contribute the
/// closed-form repetition exponent H(delta).
class WeightEnumerator {
  public:
    explicit WeightEnumerator(const Protograph& g) : n_v_(g.n_v) {
        g.validate();
        // Union-find over variables linked by degree-2 checks.
        parent_.resize(g.n_v);
        for (int j = 0; j < g.n_v; ++j) parent_[j] = j;
        auto degrees = g.check_degrees();
        std::vector<std::vector<int>> check_vars(g.n_c);
        for (const Edge& e : g.edges) check_vars[e.check].push_back(e.variable);
        for (int k = 0; k < g.n_c; ++k)
            if (degrees[k] == 2) unite(check_vars[k][0], check_vars[k][1]);

        std::vector<int> root_to_group(g.n_v, -1);
        for (int j = 0; j < g.n_v; ++j) {
            int r = find(j);
            if (root_to_group[r] < 0) {
                root_to_group[r] = n_groups_++;
                group_size_.push_back(0.0);
                group_entropy_weight_.push_back(0.0);
            }
            group_of_var_.push_back(root_to_group[r]);
        }
        auto vdeg = g.variable_degrees();
        for (int j = 0; j < g.n_v; ++j) {
            group_size_[group_of_var_[j]] += 1.0;
            group_entropy_weight_[group_of_var_[j]] += vdeg[j] - 1.0;
        }
        for (int k = 0; k < g.n_c; ++k) {
            if (degrees[k] == 2) {
                deg2_group_.push_back(group_of_var_[check_vars[k][0]]);
            } else {
                std::vector<int> groups;
                for (int v : check_vars[k]) groups.push_back(group_of_var_[v]);
                check_groups_.push_back(std::move(groups));
            }
        }
    }

    int groups() const { return n_groups_; }

    SpectralShapeResult spectral_shape_detailed(double delta) const {
        if (delta < 0.0 || delta >= 1.0)
            throw std::invalid_argument("delta must be in [0,1)");
        SpectralShapeResult out;
        out.delta = delta;
        if (delta == 0.0) return out;  // all-zero codeword: r(0) = 0

        const double target = delta * n_v_;
        double best = detail::kNegInf;
        double best_residual = 0.0;

        std::mt19937_64 rng(0x5eedULL);
        for (int start = 0; start < 5; ++start) {
            std::vector<double> v(n_groups_, delta);
            if (start == 1) {
                // Boundary biased: load the low-entropy-cost groups.
                for (int gidx = 0; gidx < n_groups_; ++gidx)
                    v[gidx] = delta * (group_entropy_weight_[gidx] <
                                               2.0 * group_size_[gidx]
                                           ? 3.0
                                           : 0.5);
            } else if (start >= 2) {
                std::uniform_real_distribution<double> u(0.05, 1.0);
                for (auto& x : v) x = delta * 2.0 * u(rng);
            }
            double residual = 0.0;
            double f = ascend(v, target, residual);
            if (f > best) {
                best = f;
                best_residual = residual;
            }
        }
        out.feasible = std::isfinite(best);
        out.r = out.feasible ? best / n_v_ : detail::kNegInf;
        out.residual = best_residual;
        return out;
    }

    double spectral_shape(double delta) const { return spectral_shape_detailed(delta).r; }

    GrowthRateResult growth_rate(double coarse_step = 1e-3, double refine_tol = 1e-5) const {
        if (coarse_step <= 0 || refine_tol <= 0)
            throw std::invalid_argument("steps must be positive");
        GrowthRateResult out;
        // Finer sampling at small delta where the crossings of interest live.
        std::vector<double> grid;
        for (double d = 1e-4; d < 0.02; d += coarse_step / 4.0) grid.push_back(d);
        for (double d = 0.02; d <= 0.5 + 1e-12; d += coarse_step) grid.push_back(d);

        double prev_delta = 0.0;
        double prev_r = 0.0;  // r(0) = 0 limit
        bool bracketed = false;
        double lo = 0.0, hi = 0.0;
        for (double d : grid) {
            double r = spectral_shape(d);
            out.scan.push_back({d, r});
            if (!bracketed && out.scan.size() > 1 && r >= 0.0) {
                lo = prev_delta;
                hi = d;
                bracketed = true;
                break;
            }
            if (out.scan.size() == 1 && r >= 0.0) {
                // Positive already at the first sample: no negative interval.
                out.found = false;
                return out;
            }
            prev_delta = d;
            prev_r = r;
        }
        (void)prev_r;
        if (!bracketed) return out;
        while (hi - lo > refine_tol) {
            double mid = 0.5 * (lo + hi);
            if (spectral_shape(mid) >= 0.0)
                hi = mid;
            else
                lo = mid;
        }
        out.found = true;
        out.delta_min = 0.5 * (lo + hi);
        return out;
    }

  private:
    int find(int a) {
        while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
        return a;
    }
    void unite(int a, int b) { parent_[find(a)] = find(b); }

    // Objective and gradient at a group fraction vector.
    double eval(const std::vector<double>& gd, std::vector<double>& grad,
                std::vector<detail::CheckSolver>& solvers,
                double* inner_residual = nullptr) const {
        grad.assign(n_groups_, 0.0);
        double f = 0.0;
        if (inner_residual) *inner_residual = 0.0;
        for (int gidx = 0; gidx < n_groups_; ++gidx) {
            double d = gd[gidx];
            f -= group_entropy_weight_[gidx] * detail::binary_entropy(d);
            grad[gidx] -= group_entropy_weight_[gidx] * detail::binary_entropy_deriv(d);
        }
        for (int gidx : deg2_group_) {
            double d = gd[gidx];
            f += detail::binary_entropy(d);
            grad[gidx] += detail::binary_entropy_deriv(d);
        }
        std::vector<double> d_edges, g_edges;
#ifdef SCLDPC_PROFILE
        detail::g_eval_count++;
#endif
        for (size_t c = 0; c < check_groups_.size(); ++c) {
            const auto& groups = check_groups_[c];
            d_edges.clear();
            for (int gidx : groups) d_edges.push_back(clamp01(gd[gidx]));
            double a = solvers[c].solve(d_edges, +1, g_edges);
            if (!std::isfinite(a)) return detail::kNegInf;
            if (inner_residual)
                *inner_residual = std::max(*inner_residual, solvers[c].last_residual);
            f += a;
            for (size_t e = 0; e < groups.size(); ++e) grad[groups[e]] += g_edges[e];
        }
        return f;
    }

    static double clamp01(double x) {
        return std::min(std::max(x, 1e-10), 1.0 - 1e-10);
    }

    // Projection of v onto { sum w_g d_g = target, 0 <= d_g <= 1 } in the
    // diagonal metric given by scale (Euclidean when scale is null).
    void project(std::vector<double>& v, double target,
                 const std::vector<double>* scale = nullptr) const {
        auto coef = [&](int gidx) {
            double c = group_size_[gidx];
            return scale ? c * (*scale)[gidx] : c;
        };
        double tlo = -1.0, thi = 1.0;
        auto total = [&](double tau) {
            double s = 0.0;
            for (int gidx = 0; gidx < n_groups_; ++gidx)
                s += group_size_[gidx] *
                     std::min(1.0, std::max(0.0, v[gidx] - tau * coef(gidx)));
            return s;
        };
        while (total(tlo) < target) tlo *= 2.0;
        while (total(thi) > target) thi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (tlo + thi);
            if (total(mid) > target)
                tlo = mid;
            else
                thi = mid;
        }
        double tau = 0.5 * (tlo + thi);
        for (int gidx = 0; gidx < n_groups_; ++gidx)
            v[gidx] = std::min(1.0, std::max(0.0, v[gidx] - tau * coef(gidx)));
    }

    // Projected gradient ascent with backtracking from one start point.
    double ascend(std::vector<double> x, double target, double& residual) const {
        std::vector<detail::CheckSolver> solvers(check_groups_.size());
        project(x, target);
        std::vector<double> grad, gtrial;
        double f = eval(x, grad, solvers);
        // A start on an infeasible corner: nudge to the uniform point.
        if (!std::isfinite(f)) {
            x.assign(n_groups_, target / n_v_);
            f = eval(x, grad, solvers);
            if (!std::isfinite(f)) {
                residual = std::numeric_limits<double>::infinity();
                return f;
            }
        }
        // Scaled projected ascent: the objective's diagonal curvature is
        // dominated by the entropy terms, W_g / (d_g (1 - d_g)), so steps
        // taken in that metric avoid the zigzag of the raw gradient.
        double step = 0.5;
        std::vector<double> xtrial(n_groups_), sc(n_groups_);
        double f_window = f;
        for (int it = 0; it < 2000; ++it) {
            for (int gidx = 0; gidx < n_groups_; ++gidx) {
                double d = std::min(std::max(x[gidx], 1e-8), 1.0 - 1e-8);
                sc[gidx] = d * (1.0 - d) / (group_entropy_weight_[gidx] + 1.0);
            }
            bool accepted = false;
            while (step >= 1e-13) {
                for (int gidx = 0; gidx < n_groups_; ++gidx)
                    xtrial[gidx] = x[gidx] + step * sc[gidx] * grad[gidx];
                project(xtrial, target, &sc);
                double gain_lin = 0.0;
                for (int gidx = 0; gidx < n_groups_; ++gidx)
                    gain_lin += grad[gidx] * (xtrial[gidx] - x[gidx]);
                if (gain_lin <= 1e-12) break;
                double ftrial = eval(xtrial, gtrial, solvers);
                if (std::isfinite(ftrial) && ftrial >= f + 1e-4 * gain_lin) {
                    x.swap(xtrial);
                    grad.swap(gtrial);
                    f = ftrial;
                    accepted = true;
                    step = std::min(step * 1.7, 2.0);
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            if (it % 40 == 39) {  // long flat stretches do not move the exponent
                if (f - f_window < 1e-10 * (1.0 + std::abs(f))) break;
                f_window = f;
            }
        }
        // Inner saddle-point residual at the final point.
        double inner = 0.0;
        eval(x, grad, solvers, &inner);
        residual = inner;
        return f;
    }

    int n_v_ = 0;
    int n_groups_ = 0;
    std::vector<int> parent_;
    std::vector<int> group_of_var_;
    std::vector<double> group_size_;
    std::vector<double> group_entropy_weight_;
    std::vector<int> deg2_group_;                 // one entry per degree-2 check
    std::vector<std::vector<int>> check_groups_;  // per other check: group per edge
};

inline double spectral_shape(const Protograph& g, double delta) {
    return WeightEnumerator(g).spectral_shape(delta);
}

inline GrowthRateResult growth_rate(const Protograph& g, double coarse_step = 1e-3,
                                    double refine_tol = 1e-5) {
    return WeightEnumerator(g).growth_rate(coarse_step, refine_tol);
}

}  // namespace scldpc
