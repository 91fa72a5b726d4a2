#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "palm/errors.hpp"
#include "palm/linalg.hpp"

namespace palm {

// ---------------------------------------------------------------------------
// problem description
//
// min_y  f(y) + g(y_1)   s.t.  sum_i A_i^* y_i = c,
// with f(y) = 1/2 <y, Sigma y> + <b, y> convex quadratic, so the quadratic
// majorizer of f with curvature Sigma is exact.

enum class GKind { Zero, InfBall, NonNeg, L1 };

/// Nonsmooth term acting on block 1 only.
struct GSpec {
    GKind kind = GKind::Zero;
    double mu = 0.0; // ball radius or l1 weight; ignored for Zero/NonNeg

    bool is_zero() const { return kind == GKind::Zero; }
};

/// Multi-block instance with dense operator blocks. A_blocks[i] stores the
/// matrix of A_i^* (x_dim rows, block_dims[i] columns).
struct DenseBlockInstance {
    std::vector<int> block_dims;
    std::vector<DenseMatrix> A_blocks;
    Vector c;          // right-hand side in X
    DenseMatrix Sigma; // symmetric PSD over the full Y space
    Vector b;          // linear term of f; grad f(y) = Sigma y + b
    GSpec g;

    int p() const { return static_cast<int>(block_dims.size()); }
    int xdim() const { return static_cast<int>(c.size()); }
    int ydim() const {
        int s = 0;
        for (int d : block_dims) s += d;
        return s;
    }
    int offset(int i) const {
        int s = 0;
        for (int j = 0; j < i; ++j) s += block_dims[j];
        return s;
    }

    /// A^* y = sum_i A_i^* y_i
    Vector apply_astar(const Vector& y) const {
        Vector r(xdim(), 0.0);
        int off = 0;
        for (int i = 0; i < p(); ++i) {
            const Vector yi(y.begin() + off, y.begin() + off + block_dims[i]);
            const Vector t = matvec(A_blocks[i], yi);
            axpy(1.0, t, r);
            off += block_dims[i];
        }
        return r;
    }

    /// A x = (A_1 x, ..., A_p x) stacked
    Vector apply_a(const Vector& x) const {
        Vector r(ydim());
        int off = 0;
        for (int i = 0; i < p(); ++i) {
            const Vector t = tmatvec(A_blocks[i], x);
            std::copy(t.begin(), t.end(), r.begin() + off);
            off += block_dims[i];
        }
        return r;
    }

    Vector grad_f(const Vector& y) const {
        Vector r = matvec(Sigma, y);
        axpy(1.0, b, r);
        return r;
    }

    DenseMatrix sigma_block(int i, int j) const {
        const int oi = offset(i), oj = offset(j);
        DenseMatrix blk(block_dims[i], block_dims[j]);
        for (int r = 0; r < blk.rows; ++r)
            for (int cidx = 0; cidx < blk.cols; ++cidx) blk(r, cidx) = Sigma(oi + r, oj + cidx);
        return blk;
    }

    void validate() const {
        if (block_dims.empty()) throw std::invalid_argument("instance: no blocks");
        for (int d : block_dims)
            if (d <= 0) throw std::invalid_argument("instance: nonpositive block dim");
        if (static_cast<int>(A_blocks.size()) != p())
            throw std::invalid_argument("instance: A_blocks count mismatch");
        for (int i = 0; i < p(); ++i)
            if (A_blocks[i].rows != xdim() || A_blocks[i].cols != block_dims[i])
                throw std::invalid_argument("instance: A block " + std::to_string(i) +
                                            " has wrong shape");
        if (Sigma.rows != ydim() || Sigma.cols != ydim())
            throw std::invalid_argument("instance: Sigma has wrong shape");
        if (!is_symmetric(Sigma)) throw std::invalid_argument("instance: Sigma not symmetric");
        if (static_cast<int>(b.size()) != ydim())
            throw std::invalid_argument("instance: b has wrong size");
        if (min_eigenvalue(Sigma) < -1e-10 * std::max(1.0, max_abs(Sigma)))
            throw std::invalid_argument("instance: Sigma not positive semidefinite");
    }
};

// ---------------------------------------------------------------------------
// proximal maps of g (block 1)

/// argmin_t g(t) + sum_j d_j/2 (t_j - z_j)^2, diagonal metric d > 0.
inline Vector prox_g_diag(const GSpec& g, const Vector& z, const Vector& d) {
    Vector t(z.size());
    switch (g.kind) {
    case GKind::Zero:
        t = z;
        break;
    case GKind::InfBall:
        for (std::size_t j = 0; j < z.size(); ++j) t[j] = std::clamp(z[j], -g.mu, g.mu);
        break;
    case GKind::NonNeg:
        for (std::size_t j = 0; j < z.size(); ++j) t[j] = std::max(0.0, z[j]);
        break;
    case GKind::L1:
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double thr = g.mu / d[j];
            t[j] = (z[j] > thr) ? z[j] - thr : (z[j] < -thr ? z[j] + thr : 0.0);
        }
        break;
    }
    return t;
}

/// Euclidean prox of g.
inline Vector prox_g(const GSpec& g, const Vector& z) {
    return prox_g_diag(g, z, Vector(z.size(), 1.0));
}

// ---------------------------------------------------------------------------
// penalty schedules

/// Piecewise-constant penalty sequence: iteration k uses sigmas[k / segment_length].
struct PenaltySchedule {
    std::vector<double> sigmas;
    int segment_length = 1; // K_0
    int total_iters = 0;    // K
    double step_size = 1.618;

    int segments() const {
        return (total_iters + segment_length - 1) / segment_length; // ceil(K/K_0)
    }
    double sigma_at(int k) const { return sigmas[k / segment_length]; }

    void validate() const {
        if (segment_length < 1) throw std::invalid_argument("schedule: segment_length < 1");
        if (total_iters < 0) throw std::invalid_argument("schedule: negative iteration count");
        if (static_cast<int>(sigmas.size()) != segments())
            throw std::invalid_argument("schedule: need ceil(K/K_0) = " +
                                        std::to_string(segments()) + " penalty values, got " +
                                        std::to_string(sigmas.size()));
        for (double s : sigmas)
            if (!(s > 0.0) || !std::isfinite(s))
                throw std::invalid_argument("schedule: penalty values must be positive");
        if (!(step_size > 0.0) || !(step_size < 2.0))
            throw std::invalid_argument("schedule: step size must lie strictly inside (0,2)");
    }
};

/// Constant schedule sigma_j = sigma for all segments.
inline PenaltySchedule constant_schedule(double sigma, int total_iters, int segment_length = 1,
                                         double step_size = 1.618) {
    PenaltySchedule s;
    s.segment_length = segment_length;
    s.total_iters = total_iters;
    s.step_size = step_size;
    s.sigmas.assign(static_cast<std::size_t>(s.segments()), sigma);
    return s;
}

// ---------------------------------------------------------------------------
// symmetric Gauss-Seidel decomposition
//
// Qtilde = sigma A A^* + Stilde + Sigma = U + D + U^T with D its block diagonal
// and U its strict block-upper part. Shat = U D^{-1} U^T. The prox term used by
// the solver is S = Stilde + Shat; one backward plus one forward block sweep
// then minimizes phi exactly (identity Qtilde + Shat = (D+U) D^{-1} (D+U)^T).

struct SgsDecomposition {
    double sigma = 0.0;
    DenseMatrix Qtilde;
    DenseMatrix Dblock;
    DenseMatrix U;
    DenseMatrix Shat;
    std::vector<DenseMatrix> Stilde; // one block per Y_i

    std::vector<DenseMatrix> gram;    // G_i = A_i A_i^*
    std::vector<LuFactor> d_factors;  // factor of each D_ii
    Vector d1_diag;                   // diagonal of D_11, set when g is nonsmooth
};

inline std::vector<DenseMatrix> zero_stilde(const DenseBlockInstance& inst) {
    std::vector<DenseMatrix> s;
    s.reserve(inst.p());
    for (int d : inst.block_dims) s.emplace_back(d, d);
    return s;
}

inline SgsDecomposition build_sgs(const DenseBlockInstance& inst, double sigma,
                                  const std::vector<DenseMatrix>& stilde) {
    const int p = inst.p();
    const int n = inst.ydim();
    if (static_cast<int>(stilde.size()) != p)
        throw std::invalid_argument("build_sgs: Stilde block count mismatch");
    for (int i = 0; i < p; ++i)
        if (stilde[i].rows != inst.block_dims[i] || stilde[i].cols != inst.block_dims[i])
            throw std::invalid_argument("build_sgs: Stilde block " + std::to_string(i) +
                                        " has wrong shape");
    if (!(sigma > 0.0)) throw std::invalid_argument("build_sgs: sigma must be positive");

    SgsDecomposition d;
    d.sigma = sigma;
    d.Stilde = stilde;

    d.Qtilde = DenseMatrix(n, n);
    d.gram.resize(p);
    for (int i = 0; i < p; ++i) {
        const int oi = inst.offset(i);
        for (int j = i; j < p; ++j) {
            const int oj = inst.offset(j);
            const DenseMatrix gij = matmul_at_b(inst.A_blocks[i], inst.A_blocks[j]);
            if (j == i) d.gram[i] = gij;
            for (int r = 0; r < gij.rows; ++r)
                for (int cidx = 0; cidx < gij.cols; ++cidx) {
                    d.Qtilde(oi + r, oj + cidx) = sigma * gij(r, cidx);
                    if (j > i) d.Qtilde(oj + cidx, oi + r) = sigma * gij(r, cidx);
                }
        }
    }
    for (int r = 0; r < n; ++r)
        for (int cidx = 0; cidx < n; ++cidx) d.Qtilde(r, cidx) += inst.Sigma(r, cidx);
    for (int i = 0; i < p; ++i) {
        const int oi = inst.offset(i);
        for (int r = 0; r < inst.block_dims[i]; ++r)
            for (int cidx = 0; cidx < inst.block_dims[i]; ++cidx)
                d.Qtilde(oi + r, oi + cidx) += stilde[i](r, cidx);
    }

    d.Dblock = DenseMatrix(n, n);
    d.U = DenseMatrix(n, n);
    for (int i = 0; i < p; ++i) {
        const int oi = inst.offset(i);
        const int di = inst.block_dims[i];
        for (int r = 0; r < di; ++r)
            for (int cidx = 0; cidx < di; ++cidx)
                d.Dblock(oi + r, oi + cidx) = d.Qtilde(oi + r, oi + cidx);
        for (int j = i + 1; j < p; ++j) {
            const int oj = inst.offset(j);
            for (int r = 0; r < di; ++r)
                for (int cidx = 0; cidx < inst.block_dims[j]; ++cidx)
                    d.U(oi + r, oj + cidx) = d.Qtilde(oi + r, oj + cidx);
        }
    }

    // Assumption: each 1/2 Sigma_ii + sigma G_i + Stilde_ii is PD and
    // Stilde + 1/2 Sigma is PSD; D_ii is then PD as well.
    for (int i = 0; i < p; ++i) {
        DenseMatrix blk = inst.sigma_block(i, i);
        for (double& e : blk.entries) e *= 0.5;
        for (int r = 0; r < blk.rows; ++r)
            for (int cidx = 0; cidx < blk.cols; ++cidx)
                blk(r, cidx) += sigma * d.gram[i](r, cidx) + stilde[i](r, cidx);
        const double lmin = min_eigenvalue(blk);
        if (lmin <= 1e-10 * std::max(1.0, max_abs(blk)))
            throw assumption_violation("diagonal block " + std::to_string(i) +
                                           " not positive definite (min eigenvalue " +
                                           std::to_string(lmin) + ")",
                                       i);
    }
    {
        DenseMatrix chk = inst.Sigma;
        for (double& e : chk.entries) e *= 0.5;
        for (int i = 0; i < p; ++i) {
            const int oi = inst.offset(i);
            for (int r = 0; r < inst.block_dims[i]; ++r)
                for (int cidx = 0; cidx < inst.block_dims[i]; ++cidx)
                    chk(oi + r, oi + cidx) += stilde[i](r, cidx);
        }
        const double lmin = min_eigenvalue(chk);
        if (lmin < -1e-10 * std::max(1.0, max_abs(chk)))
            throw assumption_violation("Stilde + Sigma/2 not positive semidefinite", -1);
    }

    for (int i = 0; i < p; ++i) {
        const int oi = inst.offset(i);
        const int di = inst.block_dims[i];
        DenseMatrix dii(di, di);
        for (int r = 0; r < di; ++r)
            for (int cidx = 0; cidx < di; ++cidx) dii(r, cidx) = d.Dblock(oi + r, oi + cidx);
        d.d_factors.push_back(lu_factor(dii));
    }

    // Exactness of the block-1 prox step requires a diagonal metric whenever g
    // is nonsmooth; both supported dual formulations satisfy this by design.
    if (!inst.g.is_zero()) {
        const int d1 = inst.block_dims[0];
        d.d1_diag.resize(d1);
        double off = 0.0;
        for (int r = 0; r < d1; ++r) {
            d.d1_diag[r] = d.Dblock(r, r);
            for (int cidx = 0; cidx < d1; ++cidx)
                if (cidx != r) off = std::max(off, std::abs(d.Dblock(r, cidx)));
        }
        if (off > 1e-12 * std::max(1.0, max_abs(d.Dblock)))
            throw std::invalid_argument(
                "build_sgs: block 1 metric must be diagonal for nonsmooth g");
    }

    // Shat = U D^{-1} U^T, computed blockwise: only block rows above each
    // block column are nonzero in U.
    d.Shat = DenseMatrix(n, n);
    {
        DenseMatrix z(n, n); // z = D^{-1} U^T
        for (int i = 0; i < p; ++i) {
            const int oi = inst.offset(i);
            const int di = inst.block_dims[i];
            Vector col(di);
            for (int cidx = 0; cidx < n; ++cidx) {
                for (int r = 0; r < di; ++r) col[r] = d.U(cidx, oi + r); // (U^T)(oi+r, cidx)
                bool nonzero = false;
                for (double v : col)
                    if (v != 0.0) nonzero = true;
                if (!nonzero) continue;
                const Vector sol = lu_solve(d.d_factors[i], col);
                for (int r = 0; r < di; ++r) z(oi + r, cidx) = sol[r];
            }
        }
        d.Shat = matmul(d.U, z);
        // enforce exact symmetry against roundoff
        for (int r = 0; r < n; ++r)
            for (int cidx = r + 1; cidx < n; ++cidx) {
                const double v = 0.5 * (d.Shat(r, cidx) + d.Shat(cidx, r));
                d.Shat(r, cidx) = d.Shat(cidx, r) = v;
            }
    }
    return d;
}

// ---------------------------------------------------------------------------
// the two-sweep subproblem solver
//
// One backward sweep over blocks p..2 followed by one forward sweep over 1..p
// returns the exact minimizer of
//   phi(y) = f(y) + g(y_1) + <A^*y - c, x> + sigma/2 |A^*y - c|^2
//            + 1/2 |y - y_prev|^2_{Stilde + Shat}.

namespace detail {

/// Solve the block-i subproblem given the freshest values of all other blocks.
/// The stationarity condition is
///   (Sigma_ii + sigma G_i + Stilde_ii) y_i
///     = -b_i - sum_{j!=i} Sigma_ij y_j - A_i(x + sigma r_{-i}) + Stilde_ii yprev_i
/// with r_{-i} the constraint residual excluding block i's contribution.
inline void sweep_update_block(const DenseBlockInstance& inst, const SgsDecomposition& dec, int i,
                               const Vector& x, const Vector& yprev, Vector& y, Vector& r,
                               Vector& sy) {
    const int oi = inst.offset(i);
    const int di = inst.block_dims[i];
    const Vector yi_old(y.begin() + oi, y.begin() + oi + di);

    Vector xr(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) xr[t] = x[t] + dec.sigma * r[t];
    Vector rhs = tmatvec(inst.A_blocks[i], xr); // A_i(x + sigma r)
    const Vector gi_yi = matvec(dec.gram[i], yi_old);
    for (int t = 0; t < di; ++t)
        rhs[t] = -inst.b[oi + t] - sy[oi + t] - rhs[t] + dec.sigma * gi_yi[t];
    // add back block i's own Sigma contribution, then the proximal anchor
    const DenseMatrix sii = inst.sigma_block(i, i);
    const Vector sii_yi = matvec(sii, yi_old);
    const Vector yprev_i(yprev.begin() + oi, yprev.begin() + oi + di);
    const Vector st_yprev = matvec(dec.Stilde[i], yprev_i);
    for (int t = 0; t < di; ++t) rhs[t] += sii_yi[t] + st_yprev[t];

    Vector yi_new;
    if (i == 0 && !inst.g.is_zero()) {
        Vector z(di);
        for (int t = 0; t < di; ++t) z[t] = rhs[t] / dec.d1_diag[t];
        yi_new = prox_g_diag(inst.g, z, dec.d1_diag);
    } else {
        yi_new = lu_solve(dec.d_factors[i], rhs);
    }

    Vector delta(di);
    for (int t = 0; t < di; ++t) delta[t] = yi_new[t] - yi_old[t];
    std::copy(yi_new.begin(), yi_new.end(), y.begin() + oi);
    const Vector rd = matvec(inst.A_blocks[i], delta);
    axpy(1.0, rd, r);
    // sy += Sigma[:, block i] * delta
    for (int row = 0; row < inst.ydim(); ++row) {
        double acc = 0.0;
        for (int t = 0; t < di; ++t) acc += inst.Sigma(row, oi + t) * delta[t];
        sy[row] += acc;
    }
}

} // namespace detail

inline Vector sgs_sweep(const DenseBlockInstance& inst, const SgsDecomposition& dec,
                        const Vector& x, const Vector& y_in) {
    const int p = inst.p();
    Vector y = y_in;
    Vector r = inst.apply_astar(y);
    for (std::size_t t = 0; t < r.size(); ++t) r[t] -= inst.c[t];
    Vector sy = matvec(inst.Sigma, y);
    for (int i = p - 1; i >= 1; --i) detail::sweep_update_block(inst, dec, i, x, y_in, y, r, sy);
    for (int i = 0; i < p; ++i) detail::sweep_update_block(inst, dec, i, x, y_in, y, r, sy);
    return y;
}

// ---------------------------------------------------------------------------
// KKT diagnostics

struct KktResidual {
    double primal_infeas = 0.0;
    double dual_infeas = 0.0;
    double max_resid = 0.0;
};

inline KktResidual kkt_residual(const DenseBlockInstance& inst, const Vector& x, const Vector& y) {
    KktResidual res;
    Vector r = inst.apply_astar(y);
    for (std::size_t t = 0; t < r.size(); ++t) r[t] -= inst.c[t];
    res.primal_infeas = norm2(r) / (1.0 + norm2(inst.c));

    Vector v = inst.grad_f(y);
    const Vector ax = inst.apply_a(x);
    axpy(1.0, ax, v);

    double dual = 0.0;
    for (int i = 0; i < inst.p(); ++i) {
        const int oi = inst.offset(i);
        const int di = inst.block_dims[i];
        const Vector yi(y.begin() + oi, y.begin() + oi + di);
        double num;
        if (i == 0) {
            Vector z(di);
            for (int t = 0; t < di; ++t) z[t] = yi[t] - v[oi + t];
            const Vector pz = prox_g(inst.g, z);
            num = norm2(yi - pz);
        } else {
            const Vector vi(v.begin() + oi, v.begin() + oi + di);
            num = norm2(vi);
        }
        dual = std::max(dual, num / (1.0 + norm2(yi)));
    }
    res.dual_infeas = dual;
    res.max_resid = std::max(res.primal_infeas, res.dual_infeas);
    return res;
}

struct AssumptionReport {
    std::vector<double> block_min_eigs;   // lambda_min of 1/2 Sigma_ii + sigma G_i + Stilde_ii
    double coupling_min_eig = 0.0;        // lambda_min of Stilde + 1/2 Sigma
    bool ok(double tol = 1e-10) const {
        for (double v : block_min_eigs)
            if (v <= tol) return false;
        return coupling_min_eig >= -tol;
    }
};

inline AssumptionReport check_assumptions(const DenseBlockInstance& inst, double sigma,
                                          const std::vector<DenseMatrix>& stilde) {
    AssumptionReport rep;
    for (int i = 0; i < inst.p(); ++i) {
        DenseMatrix blk = inst.sigma_block(i, i);
        for (double& e : blk.entries) e *= 0.5;
        const DenseMatrix gi = matmul_at_b(inst.A_blocks[i], inst.A_blocks[i]);
        for (int r = 0; r < blk.rows; ++r)
            for (int cidx = 0; cidx < blk.cols; ++cidx)
                blk(r, cidx) += sigma * gi(r, cidx) + stilde[i](r, cidx);
        rep.block_min_eigs.push_back(min_eigenvalue(blk));
    }
    DenseMatrix chk = inst.Sigma;
    for (double& e : chk.entries) e *= 0.5;
    for (int i = 0; i < inst.p(); ++i) {
        const int oi = inst.offset(i);
        for (int r = 0; r < inst.block_dims[i]; ++r)
            for (int cidx = 0; cidx < inst.block_dims[i]; ++cidx)
                chk(oi + r, oi + cidx) += stilde[i](r, cidx);
    }
    rep.coupling_min_eig = min_eigenvalue(chk);
    return rep;
}

// ---------------------------------------------------------------------------
// driver

struct SolverTrajectory {
    std::vector<Vector> x_iters;          // x^0 .. x^K
    Vector y_final;
    std::vector<KktResidual> kkt_history; // one entry per iteration
};

/// Run the penalty-scheduled solver for schedule.total_iters iterations.
/// The decomposition is rebuilt once per schedule segment.
inline SolverTrajectory mpalm_run(const DenseBlockInstance& inst, const PenaltySchedule& schedule,
                                  const std::vector<DenseMatrix>& stilde, const Vector& x0,
                                  const Vector& y0) {
    schedule.validate();
    if (static_cast<int>(x0.size()) != inst.xdim())
        throw std::invalid_argument("mpalm_run: x0 has wrong size");
    if (static_cast<int>(y0.size()) != inst.ydim())
        throw std::invalid_argument("mpalm_run: y0 has wrong size");

    SolverTrajectory traj;
    traj.x_iters.reserve(static_cast<std::size_t>(schedule.total_iters) + 1);
    traj.kkt_history.reserve(static_cast<std::size_t>(schedule.total_iters));
    Vector x = x0;
    Vector y = y0;
    traj.x_iters.push_back(x);

    SgsDecomposition dec;
    int current_segment = -1;
    for (int k = 0; k < schedule.total_iters; ++k) {
        const int j = k / schedule.segment_length;
        if (j != current_segment) {
            dec = build_sgs(inst, schedule.sigmas[j], stilde);
            current_segment = j;
        }
        y = sgs_sweep(inst, dec, x, y);
        Vector r = inst.apply_astar(y);
        for (std::size_t t = 0; t < r.size(); ++t) r[t] -= inst.c[t];
        axpy(schedule.step_size * schedule.sigmas[j], r, x);
        traj.x_iters.push_back(x);
        traj.kkt_history.push_back(kkt_residual(inst, x, y));
    }
    traj.y_final = y;
    return traj;
}

} // namespace palm
