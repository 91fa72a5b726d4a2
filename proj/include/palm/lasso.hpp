#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "palm/errors.hpp"
#include "palm/linalg.hpp"
#include "palm/mpalm.hpp"
#include "palm/rng.hpp"

namespace palm {

// ---------------------------------------------------------------------------
// problem data
//
// Primal:  min_w 1/2 |Dw - xi|^2 + mu |w|_1
// Dual:    min   delta_{B_mu}(-y1) + 1/2 |y2|^2 - <xi, y2>  s.t.  y1 + D^T y2 = 0
// The dual multiplier x recovers the primal solution w.

struct LassoInstance {
    DenseMatrix D; // m x n dictionary
    Vector xi;     // signal in R^m
    double mu = 0.1;

    int m() const { return D.rows; }
    int n() const { return D.cols; }

    void validate() const {
        if (D.rows < 1 || D.cols < 1) throw std::invalid_argument("lasso: empty dictionary");
        if (static_cast<int>(xi.size()) != D.rows)
            throw std::invalid_argument("lasso: signal size mismatch");
        if (!(mu > 0.0)) throw std::invalid_argument("lasso: mu must be positive");
    }
};

/// Gaussian dictionary with unit-norm columns, deterministic per seed.
inline DenseMatrix gen_dictionary(int m, int n, std::uint64_t seed) {
    if (m < 1 || n < 1) throw std::invalid_argument("gen_dictionary: m,n >= 1 required");
    Rng rng(seed);
    DenseMatrix d(m, n);
    for (double& e : d.entries) e = rng.gaussian();
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += d(i, j) * d(i, j);
        s = std::sqrt(s);
        if (s < 1e-300) {
            d(0, j) = 1.0;
            s = 1.0;
        }
        for (int i = 0; i < m; ++i) d(i, j) /= s;
    }
    return d;
}

// ---------------------------------------------------------------------------
// spectral cache for (I + sigma D D^T)^{-1}
//
// DD^T = P diag(lambda) P^T is computed once; every sigma then gives the
// inverse through the diagonal factors 1/(1 + sigma lambda_i).

struct SpectralCache {
    DenseMatrix P;
    Vector lambda; // descending, nonnegative
};

inline SpectralCache build_spectral_cache(const DenseMatrix& d) {
    const SymEig eig = sym_eig(matmul(d, transpose(d)));
    SpectralCache cache{eig.eigvecs, eig.eigvals};
    for (double& l : cache.lambda)
        if (l < 0.0) l = 0.0; // clamp eigensolver roundoff; DD^T is PSD
    return cache;
}

inline Vector inv_apply(const SpectralCache& cache, double sigma, const Vector& v) {
    Vector t = tmatvec(cache.P, v);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] /= 1.0 + sigma * cache.lambda[i];
    return matvec(cache.P, t);
}

inline Vector project_box(const Vector& v, double mu) {
    Vector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = std::clamp(v[i], -mu, mu);
    return r;
}

// ---------------------------------------------------------------------------
// dual solver

struct LassoDualState {
    Vector x;  // R^n
    Vector y1; // R^n
    Vector y2; // R^m
};

inline LassoDualState zero_lasso_state(const LassoInstance& inst) {
    return {Vector(inst.n(), 0.0), Vector(inst.n(), 0.0), Vector(inst.m(), 0.0)};
}

namespace detail {

inline KktResidual lasso_kkt(const LassoInstance& inst, const Vector& x, const Vector& y1,
                             const Vector& y2) {
    KktResidual res;
    const Vector dty2 = tmatvec(inst.D, y2);
    res.primal_infeas = norm2(y1 + dty2); // |c| = 0
    const Vector dx = matvec(inst.D, x);
    double dual = 0.0;
    {
        // block 1: grad f + A x = x; natural residual of the box indicator
        Vector z(y1.size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = y1[i] - x[i];
        const Vector pz = project_box(z, inst.mu);
        Vector diff(y1.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = y1[i] - pz[i];
        dual = norm2(diff) / (1.0 + norm2(y1));
    }
    {
        // block 2: grad f + A x = y2 - xi + D x
        Vector v(y2.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = y2[i] - inst.xi[i] + dx[i];
        dual = std::max(dual, norm2(v) / (1.0 + norm2(y2)));
    }
    res.dual_infeas = dual;
    res.max_resid = std::max(res.primal_infeas, res.dual_infeas);
    return res;
}

} // namespace detail

/// Scheduled sGS solver on the Lasso dual: per iteration a y2 half-step,
/// the y1 projection step, the y2 full step, and the multiplier step.
inline SolverTrajectory lasso_mpalm_run(const LassoInstance& inst, const SpectralCache& cache,
                                        const PenaltySchedule& schedule,
                                        const LassoDualState& init, bool record_kkt = true) {
    inst.validate();
    schedule.validate();
    Vector x = init.x;
    Vector y1 = init.y1;
    Vector y2 = init.y2;

    SolverTrajectory traj;
    traj.x_iters.reserve(static_cast<std::size_t>(schedule.total_iters) + 1);
    traj.x_iters.push_back(x);

    int current_segment = -1;
    Vector diag_inv; // 1/(1 + sigma lambda_i), refreshed per segment
    for (int k = 0; k < schedule.total_iters; ++k) {
        const int j = k / schedule.segment_length;
        const double sigma = schedule.sigmas[j];
        if (j != current_segment) {
            diag_inv.resize(cache.lambda.size());
            for (std::size_t i = 0; i < diag_inv.size(); ++i)
                diag_inv[i] = 1.0 / (1.0 + sigma * cache.lambda[i]);
            current_segment = j;
        }
        auto apply_inv = [&](const Vector& v) {
            Vector t = tmatvec(cache.P, v);
            for (std::size_t i = 0; i < t.size(); ++i) t[i] *= diag_inv[i];
            return matvec(cache.P, t);
        };

        const Vector dx = matvec(inst.D, x);
        const Vector dy1 = matvec(inst.D, y1);
        Vector rhs(inst.m());
        for (int i = 0; i < inst.m(); ++i) rhs[i] = inst.xi[i] - dx[i] - sigma * dy1[i];
        const Vector y2_half = apply_inv(rhs);

        const Vector dty2 = tmatvec(inst.D, y2_half);
        Vector z(inst.n());
        for (int i = 0; i < inst.n(); ++i) z[i] = dty2[i] + x[i] / sigma;
        const Vector proj = project_box(z, inst.mu);
        for (int i = 0; i < inst.n(); ++i) y1[i] = -proj[i];

        const Vector dy1_new = matvec(inst.D, y1);
        for (int i = 0; i < inst.m(); ++i) rhs[i] = inst.xi[i] - dx[i] - sigma * dy1_new[i];
        y2 = apply_inv(rhs);

        const Vector dty2_full = tmatvec(inst.D, y2);
        for (int i = 0; i < inst.n(); ++i)
            x[i] += schedule.step_size * sigma * (y1[i] + dty2_full[i]);

        traj.x_iters.push_back(x);
        if (record_kkt) traj.kkt_history.push_back(detail::lasso_kkt(inst, x, y1, y2));
    }
    traj.y_final = y1;
    traj.y_final.insert(traj.y_final.end(), y2.begin(), y2.end());
    return traj;
}

inline SolverTrajectory lasso_mpalm_run(const LassoInstance& inst, const PenaltySchedule& schedule,
                                        const LassoDualState& init, bool record_kkt = true) {
    return lasso_mpalm_run(inst, build_spectral_cache(inst.D), schedule, init, record_kkt);
}

// ---------------------------------------------------------------------------
// duality gap

/// Primal objective value plus dual (minimization form) objective value.
/// Nonnegative for any feasible dual pair, zero exactly at optima.
inline double duality_gap(const LassoInstance& inst, const Vector& w, const Vector& y1,
                          const Vector& y2) {
    const Vector dty2 = tmatvec(inst.D, y2);
    double feas = 0.0;
    for (int i = 0; i < inst.n(); ++i) feas = std::max(feas, std::abs(y1[i] + dty2[i]));
    const double box = norm_inf(y1);
    if (feas > 1e-8 || box > inst.mu + 1e-8)
        throw infeasible_certificate_error("lasso dual pair infeasible: constraint residual " +
                                           std::to_string(feas) + ", box excess " +
                                           std::to_string(std::max(0.0, box - inst.mu)));
    const Vector r = matvec(inst.D, w) - inst.xi;
    double primal = 0.5 * dot(r, r);
    for (int i = 0; i < inst.n(); ++i) primal += inst.mu * std::abs(w[i]);
    const double dual = 0.5 * dot(y2, y2) - dot(inst.xi, y2);
    return primal + dual;
}

// ---------------------------------------------------------------------------
// primal coordinate-descent oracle

/// Duality gap certified from the primal point alone: the dual candidate is
/// the scaled residual y2 = s (xi - Dw), shrunk into the feasible box.
inline double certified_gap(const LassoInstance& inst, const Vector& w) {
    const int m = inst.m();
    Vector neg_r(static_cast<std::size_t>(m));
    const Vector dw = matvec(inst.D, w);
    for (int i = 0; i < m; ++i) neg_r[static_cast<std::size_t>(i)] = inst.xi[i] - dw[i];
    const Vector dtr = tmatvec(inst.D, neg_r);
    const double denom = norm_inf(dtr);
    const double s = denom > inst.mu ? inst.mu / denom : 1.0;
    Vector y2(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) y2[static_cast<std::size_t>(i)] = s * neg_r[static_cast<std::size_t>(i)];
    Vector y1 = tmatvec(inst.D, y2);
    for (double& v : y1) v = -v;
    return duality_gap(inst, w, y1, y2);
}

struct LassoOracleResult {
    Vector w;
    double gap = 0.0; // certified duality gap at exit
};

/// Cyclic coordinate descent on the primal, stopped by certified duality gap.
/// Independent of the dual solver path.
inline LassoOracleResult lasso_oracle(const LassoInstance& inst, double tol = 1e-10) {
    inst.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("lasso_oracle: tol must be positive");
    const int m = inst.m();
    const int n = inst.n();
    Vector colsq(n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) colsq[j] += inst.D(i, j) * inst.D(i, j);

    Vector w(n, 0.0);
    Vector r(m); // r = Dw - xi
    for (int i = 0; i < m; ++i) r[i] = -inst.xi[i];

    const long max_passes = 10000000L;
    for (long pass = 0; pass < max_passes; ++pass) {
        for (int j = 0; j < n; ++j) {
            if (colsq[j] == 0.0) continue;
            double rho = colsq[j] * w[j];
            for (int i = 0; i < m; ++i) rho -= inst.D(i, j) * r[i];
            const double wj =
                (rho > inst.mu) ? (rho - inst.mu) / colsq[j]
                                : (rho < -inst.mu ? (rho + inst.mu) / colsq[j] : 0.0);
            const double delta = wj - w[j];
            if (delta != 0.0) {
                for (int i = 0; i < m; ++i) r[i] += inst.D(i, j) * delta;
                w[j] = wj;
            }
        }
        const double gap = certified_gap(inst, w);
        if (gap <= tol) return {w, gap};
    }
    throw no_convergence_error("lasso_oracle: duality gap did not reach tolerance");
}

// ---------------------------------------------------------------------------
// ISTA baseline

/// Proximal-gradient iteration with the canonical step 1/lambda_max(D^T D).
/// Returns the iterates w^0 .. w^K.
inline std::vector<Vector> ista_run(const LassoInstance& inst, const SpectralCache& cache, int K,
                                    const Vector& w0) {
    inst.validate();
    if (K < 0) throw std::invalid_argument("ista_run: K must be nonnegative");
    const double alpha = std::max(cache.lambda.empty() ? 0.0 : cache.lambda.front(), 1e-12);
    const double thr = inst.mu / alpha;

    std::vector<Vector> iters;
    iters.reserve(static_cast<std::size_t>(K) + 1);
    Vector w = w0;
    iters.push_back(w);
    for (int k = 0; k < K; ++k) {
        const Vector dw = matvec(inst.D, w);
        Vector r(inst.m());
        for (int i = 0; i < inst.m(); ++i) r[i] = dw[i] - inst.xi[i];
        const Vector grad = tmatvec(inst.D, r);
        for (int j = 0; j < inst.n(); ++j) {
            const double z = w[j] - grad[j] / alpha;
            w[j] = (z > thr) ? z - thr : (z < -thr ? z + thr : 0.0);
        }
        iters.push_back(w);
    }
    return iters;
}

inline std::vector<Vector> ista_run(const LassoInstance& inst, int K) {
    return ista_run(inst, build_spectral_cache(inst.D), K, Vector(inst.n(), 0.0));
}

// ---------------------------------------------------------------------------
// generic encoding

struct LassoEncoding {
    DenseBlockInstance inst;
    std::vector<DenseMatrix> stilde;
};

/// (DLasso) as a two-block dense instance: y = (y1, y2), A^* = [I  D^T],
/// f(y) = 1/2 |y2|^2 - <xi, y2>, g = infinity-ball indicator of radius mu.
inline LassoEncoding to_block_instance(const LassoInstance& inst) {
    LassoEncoding enc;
    const int m = inst.m();
    const int n = inst.n();
    enc.inst.block_dims = {n, m};
    enc.inst.A_blocks = {DenseMatrix::identity(n), transpose(inst.D)};
    enc.inst.c = Vector(n, 0.0);
    enc.inst.Sigma = DenseMatrix(n + m, n + m);
    for (int i = 0; i < m; ++i) enc.inst.Sigma(n + i, n + i) = 1.0;
    enc.inst.b = Vector(n + m, 0.0);
    for (int i = 0; i < m; ++i) enc.inst.b[n + i] = -inst.xi[i];
    enc.inst.g = {GKind::InfBall, inst.mu};
    enc.stilde = zero_stilde(enc.inst);
    return enc;
}

} // namespace palm
