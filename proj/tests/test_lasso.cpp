#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "palm/lasso.hpp"
#include "palm/rng.hpp"

using namespace palm;

namespace {

LassoInstance seeded_instance(int m, int n, std::uint64_t seed, double mu = 0.1) {
    LassoInstance inst;
    inst.D = gen_dictionary(m, n, seed);
    Rng rng = Rng::derive(seed, 77);
    inst.xi.resize(m);
    for (double& v : inst.xi) v = rng.gaussian();
    inst.mu = mu;
    return inst;
}

double lasso_objective(const LassoInstance& inst, const Vector& w) {
    const Vector r = matvec(inst.D, w) - inst.xi;
    double val = 0.5 * dot(r, r);
    for (double x : w) val += inst.mu * std::abs(x);
    return val;
}

} // namespace

TEST_CASE("gen_dictionary normalizes columns deterministically", "[lasso]") {
    const auto d = gen_dictionary(6, 9, 123);
    for (int j = 0; j < 9; ++j) {
        double s = 0.0;
        for (int i = 0; i < 6; ++i) s += d(i, j) * d(i, j);
        CHECK(std::sqrt(s) == Catch::Approx(1.0).margin(1e-12));
    }
    const auto d2 = gen_dictionary(6, 9, 123);
    CHECK(d.entries == d2.entries);
    const auto d3 = gen_dictionary(6, 9, 124);
    CHECK(d.entries != d3.entries);

    const auto scalar = gen_dictionary(1, 1, 5);
    CHECK(std::abs(scalar(0, 0)) == Catch::Approx(1.0));
}

TEST_CASE("inv_apply matches dense solves", "[lasso]") {
    const Vector v{1.0, -2.0, 0.5};
    {
        const auto cache = build_spectral_cache(gen_dictionary(3, 5, 9));
        const Vector r = inv_apply(cache, 0.0, v);
        for (int i = 0; i < 3; ++i) CHECK(r[i] == Catch::Approx(v[i]).margin(1e-12));
    }
    {
        // orthonormal rows: D = I gives DD^T = I
        const auto cache = build_spectral_cache(DenseMatrix::identity(3));
        const Vector r = inv_apply(cache, 3.0, v);
        for (int i = 0; i < 3; ++i) CHECK(r[i] == Catch::Approx(v[i] / 4.0).margin(1e-12));
    }
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 2 + static_cast<int>(rng.below(4));
        const int n = 1 + static_cast<int>(rng.below(6));
        const DenseMatrix d = gen_dictionary(m, n, 300 + trial);
        const auto cache = build_spectral_cache(d);
        const double sigma = rng.uniform() * 5.0;
        Vector rhs(m);
        for (double& e : rhs) e = rng.gaussian();
        const Vector fast = inv_apply(cache, sigma, rhs);
        DenseMatrix sys = matmul(d, transpose(d));
        for (double& e : sys.entries) e *= sigma;
        for (int i = 0; i < m; ++i) sys(i, i) += 1.0;
        const Vector slow = solve_dense(sys, rhs);
        CHECK(norm_inf(fast - slow) <= 1e-9);
    }
}

TEST_CASE("project_box clamps and is idempotent", "[lasso]") {
    const Vector inside{0.05, -0.03};
    CHECK(project_box(inside, 0.1) == inside);
    const Vector v{3.0, -0.05, 0.1};
    const Vector p = project_box(v, 0.1);
    CHECK(p[0] == 0.1);
    CHECK(p[1] == -0.05);
    CHECK(p[2] == 0.1);
    CHECK(project_box(p, 0.1) == p);
}

TEST_CASE("lasso solver on scalar problem", "[lasso]") {
    LassoInstance inst;
    inst.D = DenseMatrix::identity(1);
    inst.xi = {1.0};
    inst.mu = 0.1;
    const auto traj =
        lasso_mpalm_run(inst, constant_schedule(1.0, 500), zero_lasso_state(inst));
    CHECK(std::abs(traj.x_iters.back()[0] - 0.9) <= 1e-6);

    const auto oracle = lasso_oracle(inst);
    CHECK(oracle.w[0] == Catch::Approx(0.9).margin(1e-10));
    CHECK(oracle.gap <= 1e-10);
}

TEST_CASE("lasso solver with zero signal stays at zero", "[lasso]") {
    LassoInstance inst = seeded_instance(4, 7, 11);
    inst.xi.assign(4, 0.0);
    const auto traj =
        lasso_mpalm_run(inst, constant_schedule(1.0, 50), zero_lasso_state(inst));
    CHECK(norm_inf(traj.x_iters.back()) <= 1e-10);
    CHECK(norm_inf(lasso_oracle(inst).w) <= 1e-12);
}

TEST_CASE("large regularization drives the solution to zero", "[lasso]") {
    LassoInstance inst = seeded_instance(5, 8, 21);
    const Vector dtxi = tmatvec(inst.D, inst.xi);
    inst.mu = 1.05 * norm_inf(dtxi);
    CHECK(norm_inf(lasso_oracle(inst).w) <= 1e-12);
    const auto traj =
        lasso_mpalm_run(inst, constant_schedule(1.0, 2000), zero_lasso_state(inst));
    CHECK(norm2(traj.x_iters.back()) <= 1e-6);
}

TEST_CASE("dual iterates keep y1 inside the box and reach small KKT residual", "[lasso]") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const LassoInstance inst = seeded_instance(6, 10, 40 + seed);
        const auto traj =
            lasso_mpalm_run(inst, constant_schedule(1.0, 1500), zero_lasso_state(inst));
        const Vector y1(traj.y_final.begin(), traj.y_final.begin() + inst.n());
        CHECK(norm_inf(y1) <= inst.mu + 1e-12);
        CHECK(traj.kkt_history.back().max_resid <= 1e-6);
    }
}

TEST_CASE("specialized solver equals the generic block solver", "[lasso]") {
    const LassoInstance inst = seeded_instance(4, 6, 3);
    PenaltySchedule schedule;
    schedule.total_iters = 100;
    schedule.segment_length = 50;
    schedule.sigmas = {0.7, 1.3};
    schedule.step_size = 1.618;

    const auto fast = lasso_mpalm_run(inst, schedule, zero_lasso_state(inst), false);
    const auto enc = to_block_instance(inst);
    enc.inst.validate();
    const auto generic = mpalm_run(enc.inst, schedule, enc.stilde, Vector(inst.n(), 0.0),
                                   Vector(inst.n() + inst.m(), 0.0));
    REQUIRE(fast.x_iters.size() == generic.x_iters.size());
    for (std::size_t k = 0; k < fast.x_iters.size(); ++k)
        CHECK(norm_inf(fast.x_iters[k] - generic.x_iters[k]) <= 1e-9);
}

TEST_CASE("lasso encoding satisfies the solver assumptions", "[lasso]") {
    const LassoInstance inst = seeded_instance(4, 6, 3);
    const auto enc = to_block_instance(inst);
    const auto rep = check_assumptions(enc.inst, 1.0, enc.stilde);
    CHECK(rep.ok());
}

TEST_CASE("multiplier converges to the primal oracle solution", "[lasso]") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const LassoInstance inst = seeded_instance(10, 20, 100 + seed);
        const auto oracle = lasso_oracle(inst, 1e-10);
        REQUIRE(norm2(oracle.w) > 1e-8);
        const auto traj =
            lasso_mpalm_run(inst, constant_schedule(1.0, 5000), zero_lasso_state(inst), false);
        const double rel = norm2(traj.x_iters.back() - oracle.w) / norm2(oracle.w);
        CHECK(rel <= 1e-4);
    }
}

TEST_CASE("ista converges, descends, and fixes the solution", "[lasso]") {
    LassoInstance scalar;
    scalar.D = DenseMatrix::identity(1);
    scalar.xi = {1.0};
    scalar.mu = 0.1;
    const auto scalar_iters = ista_run(scalar, 200);
    CHECK(std::abs(scalar_iters.back()[0] - 0.9) <= 1e-8);

    const LassoInstance inst = seeded_instance(6, 10, 77);
    const auto iters = ista_run(inst, 300);
    for (std::size_t k = 0; k + 1 < iters.size(); ++k)
        CHECK(lasso_objective(inst, iters[k + 1]) <=
              lasso_objective(inst, iters[k]) + 1e-12);

    const auto oracle = lasso_oracle(inst, 1e-12);
    const auto cache = build_spectral_cache(inst.D);
    const auto fixed = ista_run(inst, cache, 50, oracle.w);
    CHECK(norm_inf(fixed.back() - oracle.w) <= 1e-8);
}

TEST_CASE("duality gap certifies optimality and flags infeasible pairs", "[lasso]") {
    const LassoInstance inst = seeded_instance(5, 9, 8);
    const auto oracle = lasso_oracle(inst, 1e-10);
    // rebuild the oracle's dual certificate
    const Vector r = inst.xi - matvec(inst.D, oracle.w);
    const Vector dtr = tmatvec(inst.D, r);
    const double denom = norm_inf(dtr);
    const double s = denom > inst.mu ? inst.mu / denom : 1.0;
    const Vector y2 = s * r;
    Vector y1 = tmatvec(inst.D, y2);
    for (double& v : y1) v = -v;
    CHECK(duality_gap(inst, oracle.w, y1, y2) <= 1e-8);
    CHECK(duality_gap(inst, Vector(inst.n(), 0.0), y1, y2) >
          duality_gap(inst, oracle.w, y1, y2));

    LassoInstance zero = inst;
    zero.xi.assign(zero.m(), 0.0);
    CHECK(duality_gap(zero, Vector(zero.n(), 0.0), Vector(zero.n(), 0.0),
                      Vector(zero.m(), 0.0)) == 0.0);

    Vector bad_y1 = y1;
    bad_y1[0] += 1.0; // breaks y1 + D^T y2 = 0
    CHECK_THROWS_AS(duality_gap(inst, oracle.w, bad_y1, y2), infeasible_certificate_error);
}
