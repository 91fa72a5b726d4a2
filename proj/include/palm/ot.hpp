#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "palm/errors.hpp"
#include "palm/linalg.hpp"
#include "palm/mpalm.hpp"
#include "palm/rng.hpp"

namespace palm {

// ---------------------------------------------------------------------------
// problem data
//
// Primal:  min <c, x>  s.t.  x e_n = alpha, x^T e_m = beta, x >= 0
// Dual:    min delta_+(y1) - <alpha,y2> - <beta,y3>
//          s.t. y1 + y2 e_n^T + e_m y3^T = c
// The dual multiplier x recovers the primal transport plan.

struct OtInstance {
    DenseMatrix cost; // m x n
    Vector alpha;     // R^m, probability vector
    Vector beta;      // R^n, probability vector

    int m() const { return cost.rows; }
    int n() const { return cost.cols; }

    void validate() const {
        if (cost.rows < 1 || cost.cols < 1) throw std::invalid_argument("ot: empty cost matrix");
        if (static_cast<int>(alpha.size()) != cost.rows ||
            static_cast<int>(beta.size()) != cost.cols)
            throw std::invalid_argument("ot: marginal size mismatch");
        double sa = 0.0, sb = 0.0;
        for (double v : alpha) {
            if (v < 0.0) throw std::invalid_argument("ot: negative alpha entry");
            sa += v;
        }
        for (double v : beta) {
            if (v < 0.0) throw std::invalid_argument("ot: negative beta entry");
            sb += v;
        }
        if (std::abs(sa - 1.0) > 1e-10 || std::abs(sb - 1.0) > 1e-10)
            throw std::invalid_argument("ot: marginals must sum to one");
        for (double v : cost.entries)
            if (!std::isfinite(v)) throw std::invalid_argument("ot: non-finite cost entry");
    }
};

/// Squared-distance cost on the line: C_ij = |i - j|^2.
inline DenseMatrix cost_matrix(int m, int n) {
    if (m < 1 || n < 1) throw std::invalid_argument("cost_matrix: m,n >= 1 required");
    DenseMatrix c(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = static_cast<double>((i - j) * (i - j));
    return c;
}

/// Uniform(0,1) entries normalized to sum one, deterministic per seed.
inline std::pair<Vector, Vector> gen_marginals(int m, int n, std::uint64_t seed) {
    if (m < 1 || n < 1) throw std::invalid_argument("gen_marginals: m,n >= 1 required");
    Rng rng(seed);
    Vector alpha(m), beta(n);
    double sa = 0.0, sb = 0.0;
    for (double& v : alpha) {
        v = rng.uniform_open();
        sa += v;
    }
    for (double& v : beta) {
        v = rng.uniform_open();
        sb += v;
    }
    for (double& v : alpha) v /= sa;
    for (double& v : beta) v /= sb;
    return {alpha, beta};
}

/// Two comma-separated rows (alpha then beta); entries validated nonnegative
/// and normalized to sum one.
inline std::pair<Vector, Vector> load_marginals_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw load_error("cannot open marginals file: " + path);
    std::vector<Vector> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Vector row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(tok, &pos);
                while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos])))
                    ++pos;
                if (pos != tok.size()) throw std::invalid_argument("trailing characters");
                row.push_back(v);
            } catch (const std::exception&) {
                throw parse_error("bad marginal value '" + tok + "'", lineno);
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() != 2) throw load_error("marginals file must contain exactly two rows, got " +
                                           std::to_string(rows.size()));
    for (auto& r : rows) {
        double s = 0.0;
        for (double v : r) {
            if (v < 0.0) throw load_error("negative marginal entry");
            s += v;
        }
        if (!(s > 0.0)) throw load_error("marginal row sums to zero");
        for (double& v : r) v /= s;
    }
    return {rows[0], rows[1]};
}

// ---------------------------------------------------------------------------
// dual solver (six closed-form updates per iteration)

struct OtDualState {
    DenseMatrix x;  // m x n multiplier
    DenseMatrix y1; // m x n
    Vector y2;      // R^m
    Vector y3;      // R^n
};

inline OtDualState zero_ot_state(const OtInstance& inst) {
    return {DenseMatrix(inst.m(), inst.n()), DenseMatrix(inst.m(), inst.n()),
            Vector(inst.m(), 0.0), Vector(inst.n(), 0.0)};
}

/// Intermediate values of one iteration, exposed for verification.
struct OtIterRecord {
    int k = 0;
    double sigma = 0.0;
    DenseMatrix x_prev;
    Vector y3_half;
    Vector y2_half;
    DenseMatrix y1;
    Vector y2;
    Vector y3;
};

namespace detail {

inline KktResidual ot_kkt(const OtInstance& inst, const DenseMatrix& x, const DenseMatrix& y1,
                          const Vector& y2, const Vector& y3) {
    const int m = inst.m(), n = inst.n();
    KktResidual res;
    double prim = 0.0, cnorm = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            const double r = y1(i, j) + y2[i] + y3[j] - inst.cost(i, j);
            prim += r * r;
            cnorm += inst.cost(i, j) * inst.cost(i, j);
        }
    res.primal_infeas = std::sqrt(prim) / (1.0 + std::sqrt(cnorm));

    // block 1: natural residual of the nonnegativity indicator, grad = x
    double n1 = 0.0, y1norm = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            const double pz = std::max(0.0, y1(i, j) - x(i, j));
            n1 += (y1(i, j) - pz) * (y1(i, j) - pz);
            y1norm += y1(i, j) * y1(i, j);
        }
    double dual = std::sqrt(n1) / (1.0 + std::sqrt(y1norm));
    // block 2: row sums of x minus alpha
    double n2 = 0.0;
    for (int i = 0; i < m; ++i) {
        double rs = -inst.alpha[i];
        for (int j = 0; j < n; ++j) rs += x(i, j);
        n2 += rs * rs;
    }
    dual = std::max(dual, std::sqrt(n2) / (1.0 + norm2(y2)));
    // block 3: column sums of x minus beta
    double n3 = 0.0;
    for (int j = 0; j < n; ++j) {
        double cs = -inst.beta[j];
        for (int i = 0; i < m; ++i) cs += x(i, j);
        n3 += cs * cs;
    }
    dual = std::max(dual, std::sqrt(n3) / (1.0 + norm2(y3)));
    res.dual_infeas = dual;
    res.max_resid = std::max(res.primal_infeas, res.dual_infeas);
    return res;
}

} // namespace detail

using OtIterObserver = std::function<void(const OtIterRecord&)>;

inline SolverTrajectory ot_mpalm_run(const OtInstance& inst, const PenaltySchedule& schedule,
                                     const OtDualState& init, bool record_kkt = true,
                                     const OtIterObserver& observer = nullptr) {
    inst.validate();
    schedule.validate();
    const int m = inst.m(), n = inst.n();
    DenseMatrix x = init.x;
    DenseMatrix y1 = init.y1;
    Vector y2 = init.y2;
    Vector y3 = init.y3;

    SolverTrajectory traj;
    traj.x_iters.reserve(static_cast<std::size_t>(schedule.total_iters) + 1);
    traj.x_iters.push_back(x.entries);

    Vector rowsum(m), colsum(n);
    for (int k = 0; k < schedule.total_iters; ++k) {
        const double sigma = schedule.sigma_at(k);
        const double inv_sigma = 1.0 / sigma;
        DenseMatrix x_prev;
        if (observer) x_prev = x;

        // R = y1 - c + x/sigma, accumulated into row and column sums
        std::fill(rowsum.begin(), rowsum.end(), 0.0);
        std::fill(colsum.begin(), colsum.end(), 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                const double r = y1(i, j) - inst.cost(i, j) + x(i, j) * inv_sigma;
                rowsum[i] += r;
                colsum[j] += r;
            }
        double y2sum = 0.0;
        for (double v : y2) y2sum += v;

        Vector y3_half(n);
        for (int j = 0; j < n; ++j)
            y3_half[j] = (inst.beta[j] * inv_sigma - colsum[j] - y2sum) / m;
        double y3h_sum = 0.0;
        for (double v : y3_half) y3h_sum += v;

        Vector y2_half(m);
        for (int i = 0; i < m; ++i)
            y2_half[i] = (inst.alpha[i] * inv_sigma - rowsum[i] - y3h_sum) / n;

        std::fill(rowsum.begin(), rowsum.end(), 0.0);
        std::fill(colsum.begin(), colsum.end(), 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                const double v = inst.cost(i, j) - y2_half[i] - y3_half[j] - x(i, j) * inv_sigma;
                y1(i, j) = v > 0.0 ? v : 0.0;
                const double r = y1(i, j) - inst.cost(i, j) + x(i, j) * inv_sigma;
                rowsum[i] += r;
                colsum[j] += r;
            }

        for (int i = 0; i < m; ++i)
            y2[i] = (inst.alpha[i] * inv_sigma - rowsum[i] - y3h_sum) / n;
        y2sum = 0.0;
        for (double v : y2) y2sum += v;

        for (int j = 0; j < n; ++j) y3[j] = (inst.beta[j] * inv_sigma - colsum[j] - y2sum) / m;

        const double step = schedule.step_size * sigma;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                x(i, j) += step * (y1(i, j) + y2[i] + y3[j] - inst.cost(i, j));

        traj.x_iters.push_back(x.entries);
        if (record_kkt) traj.kkt_history.push_back(detail::ot_kkt(inst, x, y1, y2, y3));
        if (observer)
            observer(OtIterRecord{k, sigma, std::move(x_prev), y3_half, y2_half, y1, y2, y3});
    }
    traj.y_final = y1.entries;
    traj.y_final.insert(traj.y_final.end(), y2.begin(), y2.end());
    traj.y_final.insert(traj.y_final.end(), y3.begin(), y3.end());
    return traj;
}

// ---------------------------------------------------------------------------
// transport plans

struct TransportPlan {
    DenseMatrix plan;
    double objective = 0.0;
};

inline double plan_objective(const DenseMatrix& cost, const DenseMatrix& plan) {
    double s = 0.0;
    for (std::size_t i = 0; i < cost.entries.size(); ++i) s += cost.entries[i] * plan.entries[i];
    return s;
}

/// Relative regularization grid {1e-1, 1e-2, 1e-3, 1e-4} * max|c|.
inline Vector default_lambda_grid(const DenseMatrix& cost) {
    double cmax = max_abs(cost);
    if (cmax == 0.0) cmax = 1.0;
    return {1e-1 * cmax, 1e-2 * cmax, 1e-3 * cmax, 1e-4 * cmax};
}

inline double marginal_error(const OtInstance& inst, const DenseMatrix& plan) {
    double err = 0.0;
    for (int i = 0; i < inst.m(); ++i) {
        double rs = 0.0;
        for (int j = 0; j < inst.n(); ++j) rs += plan(i, j);
        err += std::abs(rs - inst.alpha[i]);
    }
    for (int j = 0; j < inst.n(); ++j) {
        double cs = 0.0;
        for (int i = 0; i < inst.m(); ++i) cs += plan(i, j);
        err += std::abs(cs - inst.beta[j]);
    }
    return err;
}

// ---------------------------------------------------------------------------
// Sinkhorn baseline

struct SinkhornResult {
    TransportPlan plan;
    double marginal_err = 0.0;
    int iterations = 0;
};

using SinkhornObserver = std::function<void(int iter, const DenseMatrix& plan)>;

/// Matrix-scaling iteration on exp(-c/lambda); switches to log-domain updates
/// when the kernel would underflow. Zero marginal entries are handled by
/// restricting to the positive support and reinserting zero rows/columns.
inline SinkhornResult sinkhorn(const OtInstance& inst, double lambda, int max_iters,
                               double tol = 1e-9, const SinkhornObserver& observer = nullptr) {
    inst.validate();
    if (!(lambda > 0.0)) throw std::invalid_argument("sinkhorn: lambda must be positive");
    if (max_iters < 1) throw std::invalid_argument("sinkhorn: need at least one iteration");

    std::vector<int> rows, cols;
    for (int i = 0; i < inst.m(); ++i)
        if (inst.alpha[i] > 0.0) rows.push_back(i);
    for (int j = 0; j < inst.n(); ++j)
        if (inst.beta[j] > 0.0) cols.push_back(j);
    const int mr = static_cast<int>(rows.size());
    const int nc = static_cast<int>(cols.size());

    DenseMatrix csub(mr, nc);
    Vector a(mr), b(nc);
    double cmax = 0.0;
    for (int i = 0; i < mr; ++i) a[i] = inst.alpha[rows[i]];
    for (int j = 0; j < nc; ++j) b[j] = inst.beta[cols[j]];
    for (int i = 0; i < mr; ++i)
        for (int j = 0; j < nc; ++j) {
            csub(i, j) = inst.cost(rows[i], cols[j]);
            cmax = std::max(cmax, std::abs(csub(i, j)));
        }
    const bool log_domain = cmax / lambda > 500.0;

    DenseMatrix sub(mr, nc);
    auto expand = [&](const DenseMatrix& small) {
        DenseMatrix full(inst.m(), inst.n());
        for (int i = 0; i < mr; ++i)
            for (int j = 0; j < nc; ++j) full(rows[i], cols[j]) = small(i, j);
        return full;
    };

    SinkhornResult out;
    int it = 0;
    if (!log_domain) {
        DenseMatrix kern(mr, nc);
        for (int i = 0; i < mr; ++i)
            for (int j = 0; j < nc; ++j) kern(i, j) = std::exp(-csub(i, j) / lambda);
        Vector u(mr, 1.0), v(nc, 1.0);
        for (it = 0; it < max_iters; ++it) {
            for (int i = 0; i < mr; ++i) {
                double s = 0.0;
                for (int j = 0; j < nc; ++j) s += kern(i, j) * v[j];
                if (!(s > 0.0) || !std::isfinite(s))
                    throw numerical_instability_error("sinkhorn: kernel row sum degenerate");
                u[i] = a[i] / s;
            }
            for (int j = 0; j < nc; ++j) {
                double s = 0.0;
                for (int i = 0; i < mr; ++i) s += kern(i, j) * u[i];
                if (!(s > 0.0) || !std::isfinite(s))
                    throw numerical_instability_error("sinkhorn: kernel column sum degenerate");
                v[j] = b[j] / s;
            }
            for (int i = 0; i < mr; ++i)
                for (int j = 0; j < nc; ++j) sub(i, j) = u[i] * kern(i, j) * v[j];
            for (double e : sub.entries)
                if (!std::isfinite(e))
                    throw numerical_instability_error("sinkhorn: non-finite plan entry");
            const DenseMatrix full = expand(sub);
            out.marginal_err = marginal_error(inst, full);
            if (observer) observer(it, full);
            if (out.marginal_err <= tol) {
                ++it;
                break;
            }
        }
    } else {
        Vector f(mr, 0.0), g(nc, 0.0);
        auto lse_row = [&](int i) {
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < nc; ++j) best = std::max(best, (g[j] - csub(i, j)) / lambda);
            double s = 0.0;
            for (int j = 0; j < nc; ++j) s += std::exp((g[j] - csub(i, j)) / lambda - best);
            return best + std::log(s);
        };
        auto lse_col = [&](int j) {
            double best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < mr; ++i) best = std::max(best, (f[i] - csub(i, j)) / lambda);
            double s = 0.0;
            for (int i = 0; i < mr; ++i) s += std::exp((f[i] - csub(i, j)) / lambda - best);
            return best + std::log(s);
        };
        for (it = 0; it < max_iters; ++it) {
            for (int i = 0; i < mr; ++i) f[i] = lambda * (std::log(a[i]) - lse_row(i));
            for (int j = 0; j < nc; ++j) g[j] = lambda * (std::log(b[j]) - lse_col(j));
            for (double v : f)
                if (!std::isfinite(v))
                    throw numerical_instability_error("sinkhorn: non-finite potential");
            for (int i = 0; i < mr; ++i)
                for (int j = 0; j < nc; ++j)
                    sub(i, j) = std::exp((f[i] + g[j] - csub(i, j)) / lambda);
            const DenseMatrix full = expand(sub);
            out.marginal_err = marginal_error(inst, full);
            if (observer) observer(it, full);
            if (out.marginal_err <= tol) {
                ++it;
                break;
            }
        }
    }
    out.plan.plan = expand(sub);
    out.plan.objective = plan_objective(inst.cost, out.plan.plan);
    out.iterations = std::min(it, max_iters);
    return out;
}

// ---------------------------------------------------------------------------
// exact transportation-LP oracle (network simplex)

struct OtExactResult {
    TransportPlan plan;
    double certificate = 0.0; // max of dual infeasibility, marginal residual,
                              // and complementary slackness violation
};

/// Network simplex on the bipartite transportation graph. Dantzig pricing with
/// a Bland fallback after a pivot budget; certified by reduced-cost signs.
inline OtExactResult ot_exact(const OtInstance& inst, double tol = 1e-10) {
    inst.validate();
    double sa = 0.0, sb = 0.0;
    for (double v : inst.alpha) sa += v;
    for (double v : inst.beta) sb += v;
    if (std::abs(sa - sb) > 1e-10)
        throw std::invalid_argument("ot_exact: marginals are not balanced");

    const int m = inst.m(), n = inst.n();
    const int nodes = m + n; // rows 0..m-1, cols m..m+n-1

    // northwest-corner initial basis: exactly m+n-1 cells
    DenseMatrix flow(m, n);
    std::vector<std::pair<int, int>> basis;
    {
        Vector ra = inst.alpha, rb = inst.beta;
        int i = 0, j = 0;
        while (static_cast<int>(basis.size()) < m + n - 1) {
            basis.emplace_back(i, j);
            const double f = std::min(ra[i], rb[j]);
            flow(i, j) = f;
            ra[i] -= f;
            rb[j] -= f;
            if (i == m - 1 && j == n - 1) break;
            if (j == n - 1) {
                ++i;
            } else if (i == m - 1) {
                ++j;
            } else if (ra[i] <= rb[j]) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    std::vector<std::vector<int>> adj(nodes); // neighbor node per basic arc
    std::vector<std::vector<int>> arc_of(nodes);
    auto rebuild_adj = [&]() {
        for (auto& v : adj) v.clear();
        for (auto& v : arc_of) v.clear();
        for (int t = 0; t < static_cast<int>(basis.size()); ++t) {
            const auto [bi, bj] = basis[t];
            adj[bi].push_back(m + bj);
            arc_of[bi].push_back(t);
            adj[m + bj].push_back(bi);
            arc_of[m + bj].push_back(t);
        }
    };

    Vector u(m), v(n);
    auto compute_potentials = [&]() {
        std::vector<char> seen(nodes, 0);
        std::deque<int> queue{0};
        u[0] = 0.0;
        seen[0] = 1;
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            for (std::size_t t = 0; t < adj[node].size(); ++t) {
                const int other = adj[node][t];
                if (seen[other]) continue;
                const auto [bi, bj] = basis[arc_of[node][t]];
                if (other >= m)
                    v[other - m] = inst.cost(bi, bj) - u[bi];
                else
                    u[other] = inst.cost(bi, bj) - v[bj];
                seen[other] = 1;
                queue.push_back(other);
            }
        }
        for (char s : seen)
            if (!s) throw no_convergence_error("ot_exact: basis lost spanning-tree structure");
    };

    // path between two nodes along basic arcs (tree path, BFS)
    auto tree_path = [&](int from, int to) {
        std::vector<int> parent(nodes, -1), parc(nodes, -1);
        std::deque<int> queue{from};
        parent[from] = from;
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            if (node == to) break;
            for (std::size_t t = 0; t < adj[node].size(); ++t) {
                const int other = adj[node][t];
                if (parent[other] != -1) continue;
                parent[other] = node;
                parc[other] = arc_of[node][t];
                queue.push_back(other);
            }
        }
        std::vector<int> arcs;
        for (int node = to; node != from; node = parent[node]) arcs.push_back(parc[node]);
        std::reverse(arcs.begin(), arcs.end());
        return arcs;
    };

    const long pivot_cap = 10000L * std::max(4, nodes);
    const long bland_after = 200L * std::max(4, nodes);
    long pivots = 0;
    rebuild_adj();
    while (true) {
        if (++pivots > pivot_cap)
            throw no_convergence_error("ot_exact: pivot budget exhausted");
        compute_potentials();

        int ei = -1, ej = -1;
        double best = -1e-12;
        if (pivots <= bland_after) {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    const double rc = inst.cost(i, j) - u[i] - v[j];
                    if (rc < best) {
                        best = rc;
                        ei = i;
                        ej = j;
                    }
                }
        } else { // Bland: first eligible arc in fixed order
            for (int i = 0; i < m && ei < 0; ++i)
                for (int j = 0; j < n; ++j) {
                    const double rc = inst.cost(i, j) - u[i] - v[j];
                    if (rc < -1e-12) {
                        ei = i;
                        ej = j;
                        break;
                    }
                }
        }
        if (ei < 0) break; // optimal

        // cycle: entering arc (ei, ej) plus tree path from row ei to col ej
        const std::vector<int> path = tree_path(ei, m + ej);
        // orientation: entering arc gains flow; alternate along the path
        double theta = std::numeric_limits<double>::infinity();
        int leave = -1;
        {
            int node = ei;
            bool forward = false; // first path arc takes flow away
            for (int arc : path) {
                const auto [bi, bj] = basis[arc];
                const int other = (node == bi) ? m + bj : bi;
                if (!forward && flow(bi, bj) < theta) {
                    theta = flow(bi, bj);
                    leave = arc;
                }
                forward = !forward;
                node = other;
            }
        }
        {
            int node = ei;
            bool forward = false;
            for (int arc : path) {
                const auto [bi, bj] = basis[arc];
                const int other = (node == bi) ? m + bj : bi;
                flow(bi, bj) += forward ? theta : -theta;
                if (flow(bi, bj) < 0.0) flow(bi, bj) = 0.0; // roundoff guard
                forward = !forward;
                node = other;
            }
        }
        flow(ei, ej) += theta; // theta finite: the path's first arc always donates
        basis[leave] = {ei, ej};
        rebuild_adj();
    }

    OtExactResult out;
    out.plan.plan = flow;
    out.plan.objective = plan_objective(inst.cost, flow);

    double min_rc = 0.0, comp = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            const double rc = inst.cost(i, j) - u[i] - v[j];
            min_rc = std::min(min_rc, rc);
            comp = std::max(comp, std::abs(flow(i, j) * rc));
        }
    double marg = 0.0;
    for (int i = 0; i < m; ++i) {
        double rs = -inst.alpha[i];
        for (int j = 0; j < n; ++j) rs += flow(i, j);
        marg = std::max(marg, std::abs(rs));
    }
    for (int j = 0; j < n; ++j) {
        double cs = -inst.beta[j];
        for (int i = 0; i < m; ++i) cs += flow(i, j);
        marg = std::max(marg, std::abs(cs));
    }
    out.certificate = std::max({-min_rc, marg, comp});
    if (out.certificate > tol)
        throw no_convergence_error("ot_exact: optimality certificate " +
                                   std::to_string(out.certificate) + " above tolerance");
    return out;
}

// ---------------------------------------------------------------------------
// generic encoding

struct OtEncoding {
    DenseBlockInstance inst;
    std::vector<DenseMatrix> stilde;
};

/// (DOT) as a three-block dense instance over vec(row-major) matrices:
/// A^* = (I_mn, e_n (x) I_m, I_n (x) e_m), f linear, g = nonneg indicator.
inline OtEncoding to_block_instance(const OtInstance& ot) {
    OtEncoding enc;
    const int m = ot.m(), n = ot.n(), mn = m * n;
    enc.inst.block_dims = {mn, m, n};
    DenseMatrix a2(mn, m), a3(mn, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            a2(i * n + j, i) = 1.0;
            a3(i * n + j, j) = 1.0;
        }
    enc.inst.A_blocks = {DenseMatrix::identity(mn), a2, a3};
    enc.inst.c = ot.cost.entries;
    enc.inst.Sigma = DenseMatrix(mn + m + n, mn + m + n);
    enc.inst.b = Vector(mn + m + n, 0.0);
    for (int i = 0; i < m; ++i) enc.inst.b[mn + i] = -ot.alpha[i];
    for (int j = 0; j < n; ++j) enc.inst.b[mn + m + j] = -ot.beta[j];
    enc.inst.g = {GKind::NonNeg, 0.0};
    enc.stilde = zero_stilde(enc.inst);
    return enc;
}

} // namespace palm
