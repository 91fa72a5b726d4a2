#pragma once

// Seeded random instances and KKT pairs for exercising the generic solver.
// Instances with nonsmooth g mirror the structure of the supported dual
// formulations: block 1 carries a scaled-identity operator and decouples from
// Sigma, so the block-1 metric stays diagonal.

#include <cstdint>
#include <vector>

#include "palm/linalg.hpp"
#include "palm/mpalm.hpp"
#include "palm/rng.hpp"

namespace palm::testing {

struct GeneratedInstance {
    DenseBlockInstance inst;
    std::vector<DenseMatrix> stilde;
};

inline GeneratedInstance random_instance(Rng& rng, int p, GKind gkind, int max_dim = 6) {
    GeneratedInstance out;
    DenseBlockInstance& inst = out.inst;
    const bool nonsmooth = gkind != GKind::Zero;

    const int xdim = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_dim - 1)));
    inst.block_dims.resize(p);
    for (int i = 0; i < p; ++i)
        inst.block_dims[i] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_dim)));
    if (nonsmooth) inst.block_dims[0] = xdim; // block-1 operator is a scaled identity

    inst.c.resize(xdim);
    for (double& v : inst.c) v = rng.gaussian();

    inst.A_blocks.resize(p);
    for (int i = 0; i < p; ++i) {
        DenseMatrix a(xdim, inst.block_dims[i]);
        if (i == 0 && nonsmooth) {
            const double scale = 0.5 + rng.uniform();
            for (int r = 0; r < xdim; ++r) a(r, r) = scale;
        } else {
            for (double& e : a.entries) e = rng.gaussian();
        }
        inst.A_blocks[i] = a;
    }

    const int ydim = inst.ydim();
    DenseMatrix basis(ydim, ydim);
    for (double& e : basis.entries) e = rng.gaussian();
    inst.Sigma = matmul_at_b(basis, basis);
    for (double& e : inst.Sigma.entries) e /= ydim;
    if (nonsmooth) {
        // decouple block 1 from the smooth part
        const int d1 = inst.block_dims[0];
        for (int r = 0; r < ydim; ++r)
            for (int cidx = 0; cidx < d1; ++cidx) inst.Sigma(r, cidx) = inst.Sigma(cidx, r) = 0.0;
    }

    inst.b.resize(ydim);
    for (double& v : inst.b) v = rng.gaussian();

    inst.g.kind = gkind;
    inst.g.mu = (gkind == GKind::InfBall || gkind == GKind::L1) ? 0.5 + rng.uniform() : 0.0;

    out.stilde = zero_stilde(inst);
    for (int i = 0; i < p; ++i)
        for (int r = 0; r < inst.block_dims[i]; ++r)
            out.stilde[i](r, r) = 0.1 + 0.5 * std::abs(rng.gaussian());
    return out;
}

struct KktPair {
    Vector x;
    Vector y;
};

/// Construct an instance together with an exact KKT pair. For nonsmooth g the
/// pair is planted by choosing (x*, y*) plus a normal-cone element and solving
/// for the linear data (b, c); for g = zero it comes from the saddle system.
inline KktPair plant_kkt_pair(Rng& rng, DenseBlockInstance& inst) {
    const int ydim = inst.ydim();
    const int xdim = inst.xdim();
    KktPair pair;

    if (inst.g.is_zero()) {
        // solve [Sigma  Abar; Abar^T  0] (y; x) = (-b; c)
        DenseMatrix abar(ydim, xdim); // stacked A_i = adj_i^T
        for (int i = 0; i < inst.p(); ++i) {
            const int oi = inst.offset(i);
            for (int r = 0; r < inst.block_dims[i]; ++r)
                for (int cidx = 0; cidx < xdim; ++cidx)
                    abar(oi + r, cidx) = inst.A_blocks[i](cidx, r);
        }
        const int n = ydim + xdim;
        DenseMatrix kkt(n, n);
        for (int r = 0; r < ydim; ++r)
            for (int cidx = 0; cidx < ydim; ++cidx) kkt(r, cidx) = inst.Sigma(r, cidx);
        for (int r = 0; r < ydim; ++r)
            for (int cidx = 0; cidx < xdim; ++cidx) {
                kkt(r, ydim + cidx) = abar(r, cidx);
                kkt(ydim + cidx, r) = abar(r, cidx);
            }
        Vector rhs(n);
        for (int r = 0; r < ydim; ++r) rhs[r] = -inst.b[r];
        for (int r = 0; r < xdim; ++r) rhs[ydim + r] = inst.c[r];
        const Vector sol = solve_dense(kkt, rhs);
        pair.y.assign(sol.begin(), sol.begin() + ydim);
        pair.x.assign(sol.begin() + ydim, sol.end());
        return pair;
    }

    // plant the solution and rewrite (b, c)
    Vector y(ydim);
    for (double& v : y) v = rng.gaussian();
    const int d1 = inst.block_dims[0];
    Vector normal(ydim, 0.0); // element of the normal cone of g at y_1, stacked
    for (int t = 0; t < d1; ++t) {
        const int pick = static_cast<int>(rng.below(3));
        if (inst.g.kind == GKind::InfBall) {
            if (pick == 0) {
                y[t] = inst.g.mu;
                normal[t] = std::abs(rng.gaussian());
            } else if (pick == 1) {
                y[t] = -inst.g.mu;
                normal[t] = -std::abs(rng.gaussian());
            } else {
                y[t] = inst.g.mu * (2.0 * rng.uniform() - 1.0) * 0.9;
            }
        } else if (inst.g.kind == GKind::NonNeg) {
            if (pick == 0) {
                y[t] = 0.0;
                normal[t] = -std::abs(rng.gaussian());
            } else {
                y[t] = std::abs(rng.gaussian());
            }
        } else { // L1: subgradient mu*sign(y) or [-mu, mu] at zero
            if (pick == 0) {
                y[t] = 0.0;
                normal[t] = inst.g.mu * (2.0 * rng.uniform() - 1.0);
            } else {
                y[t] = rng.gaussian();
                normal[t] = inst.g.mu * (y[t] >= 0.0 ? 1.0 : -1.0);
            }
        }
    }
    Vector x(xdim);
    for (double& v : x) v = rng.gaussian();

    inst.c = inst.apply_astar(y);
    const Vector sy = matvec(inst.Sigma, y);
    const Vector ax = inst.apply_a(x);
    for (int r = 0; r < ydim; ++r) inst.b[r] = -sy[r] - ax[r] - normal[r];

    pair.x = x;
    pair.y = y;
    return pair;
}

inline Vector random_vector(Rng& rng, int n) {
    Vector v(n);
    for (double& e : v) e = rng.gaussian();
    return v;
}

} // namespace palm::testing
