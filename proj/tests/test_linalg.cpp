#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "palm/linalg.hpp"
#include "palm/rng.hpp"

using namespace palm;

namespace {

DenseMatrix random_symmetric(int n, Rng& rng) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = rng.gaussian();
    return m;
}

DenseMatrix reconstruct(const SymEig& e) {
    const int n = e.eigvecs.rows;
    DenseMatrix lam(n, n);
    for (int i = 0; i < n; ++i) lam(i, i) = e.eigvals[i];
    return matmul(matmul(e.eigvecs, lam), transpose(e.eigvecs));
}

} // namespace

TEST_CASE("sym_eig identity has unit spectrum", "[linalg]") {
    const auto e = sym_eig(DenseMatrix::identity(3));
    REQUIRE(e.eigvals.size() == 3);
    for (double v : e.eigvals) CHECK(v == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("sym_eig diagonal matrix sorts eigenvalues descending", "[linalg]") {
    DenseMatrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 4.0;
    const auto e = sym_eig(m);
    CHECK(e.eigvals[0] == Catch::Approx(4.0).margin(1e-14));
    CHECK(e.eigvals[1] == Catch::Approx(1.0).margin(1e-14));
    // eigenvector for eigenvalue 4 is +-e_1
    CHECK(std::abs(e.eigvecs(1, 0)) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(e.eigvecs(0, 0)) < 1e-12);
}

TEST_CASE("sym_eig reconstructs random symmetric matrices", "[linalg]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed);
        const auto m = random_symmetric(5, rng);
        const auto e = sym_eig(m);
        const auto back = reconstruct(e);
        double err = 0.0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) err = std::max(err, std::abs(back(i, j) - m(i, j)));
        CHECK(err <= 1e-8 * (1.0 + max_abs(m)));

        const auto gram = matmul_at_b(e.eigvecs, e.eigvecs);
        double orth = 0.0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                orth = std::max(orth, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
        CHECK(orth <= 1e-10);

        for (int i = 0; i + 1 < 5; ++i) CHECK(e.eigvals[i] >= e.eigvals[i + 1]);
    }
}

TEST_CASE("sym_eig rejects bad input", "[linalg]") {
    CHECK_THROWS_AS(sym_eig(DenseMatrix(2, 3)), std::invalid_argument);
    DenseMatrix m(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 2.0;
    CHECK_THROWS_AS(sym_eig(m), std::invalid_argument);
}

TEST_CASE("solve_dense identity and diagonal", "[linalg]") {
    Vector b{1.0, -2.0, 3.0};
    auto x = solve_dense(DenseMatrix::identity(3), b);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == Catch::Approx(b[i]));

    DenseMatrix d(3, 3);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    d(2, 2) = 0.5;
    x = solve_dense(d, b);
    CHECK(x[0] == Catch::Approx(0.5));
    CHECK(x[1] == Catch::Approx(-0.5));
    CHECK(x[2] == Catch::Approx(6.0));
}

TEST_CASE("solve_dense residual on seeded systems", "[linalg]") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(42 + seed);
        const int n = 2 + static_cast<int>(rng.below(9));
        DenseMatrix m(n, n);
        for (double& e : m.entries) e = rng.gaussian();
        for (int i = 0; i < n; ++i) m(i, i) += static_cast<double>(n); // keep well conditioned
        Vector b(n);
        for (double& e : b) e = rng.gaussian();
        const auto x = solve_dense(m, b);
        const auto r = matvec(m, x) - b;
        CHECK(norm2(r) <= 1e-10 * (1.0 + norm2(b)));
    }
}

TEST_CASE("solve_dense flags singular matrices", "[linalg]") {
    DenseMatrix m(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = 2.0;
    m(1, 0) = 2.0;
    m(1, 1) = 4.0; // rank 1
    CHECK_THROWS_AS(solve_dense(m, Vector{1.0, 0.0}), singular_matrix_error);
}

TEST_CASE("matrix helpers agree with hand results", "[linalg]") {
    DenseMatrix a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    const Vector v{1.0, 1.0, 1.0};
    const auto av = matvec(a, v);
    CHECK(av[0] == Catch::Approx(6.0));
    CHECK(av[1] == Catch::Approx(15.0));

    const Vector w{1.0, -1.0};
    const auto atw = tmatvec(a, w);
    CHECK(atw[0] == Catch::Approx(-3.0));
    CHECK(atw[1] == Catch::Approx(-3.0));
    CHECK(atw[2] == Catch::Approx(-3.0));

    const auto ata = matmul_at_b(a, a);
    const auto ata2 = matmul(transpose(a), a);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(ata(i, j) == Catch::Approx(ata2(i, j)));
}

TEST_CASE("rng streams are deterministic and reasonable", "[linalg]") {
    Rng a(7);
    Rng b(7);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng c(7);
    double mean = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mean += c.gaussian();
    mean /= n;
    CHECK(std::abs(mean) < 0.05);

    Rng d1 = Rng::derive(7, 1);
    Rng d2 = Rng::derive(7, 2);
    CHECK(d1.next_u64() != d2.next_u64());
}
