#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "palm/errors.hpp"

namespace palm {

using Vector = std::vector<double>;

/// Dense row-major matrix. The only matrix type in the library; every operator
/// block, dictionary, and cost matrix is one of these.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    Vector entries; // row-major, rows*cols

    DenseMatrix() = default;
    DenseMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), entries(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
        if (r < 0 || c < 0) throw std::invalid_argument("DenseMatrix: negative dimension");
    }

    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(int i, int j) { return entries[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i) * cols + j]; }

    bool empty() const { return rows == 0 || cols == 0; }
};

// ---------------------------------------------------------------------------
// vector ops

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double norm1(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

/// y += a*x
inline void axpy(double a, const Vector& x, Vector& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vector operator-(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vector operator+(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vector operator*(double a, const Vector& v) {
    Vector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = a * v[i];
    return r;
}

// ---------------------------------------------------------------------------
// matrix ops

inline Vector matvec(const DenseMatrix& m, const Vector& v) {
    if (static_cast<int>(v.size()) != m.cols) throw std::invalid_argument("matvec: size mismatch");
    Vector r(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        const double* row = m.entries.data() + static_cast<std::size_t>(i) * m.cols;
        for (int j = 0; j < m.cols; ++j) s += row[j] * v[j];
        r[i] = s;
    }
    return r;
}

/// M^T v
inline Vector tmatvec(const DenseMatrix& m, const Vector& v) {
    if (static_cast<int>(v.size()) != m.rows) throw std::invalid_argument("tmatvec: size mismatch");
    Vector r(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double* row = m.entries.data() + static_cast<std::size_t>(i) * m.cols;
        const double vi = v[i];
        for (int j = 0; j < m.cols; ++j) r[j] += row[j] * vi;
    }
    return r;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: size mismatch");
    DenseMatrix r(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

/// A^T B
inline DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_at_b: size mismatch");
    DenseMatrix r(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k)
        for (int i = 0; i < a.cols; ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) r(i, j) += aki * b(k, j);
        }
    return r;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix r(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(j, i) = m(i, j);
    return r;
}

inline double max_abs(const DenseMatrix& m) {
    double x = 0.0;
    for (double e : m.entries) x = std::max(x, std::abs(e));
    return x;
}

inline double frobenius_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double e : m.entries) s += e * e;
    return std::sqrt(s);
}

inline bool is_symmetric(const DenseMatrix& m, double rel_tol = 1e-12) {
    if (m.rows != m.cols) return false;
    const double scale = max_abs(m);
    for (int i = 0; i < m.rows; ++i)
        for (int j = i + 1; j < m.cols; ++j)
            if (std::abs(m(i, j) - m(j, i)) > rel_tol * std::max(1.0, scale)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// symmetric eigendecomposition (cyclic Jacobi)

/// Spectral factorization M = P diag(eigvals) P^T with eigvals descending.
struct SymEig {
    DenseMatrix eigvecs; // orthogonal, columns are eigenvectors
    Vector eigvals;      // sorted descending
};

inline SymEig sym_eig(const DenseMatrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("sym_eig: matrix not square");
    if (!is_symmetric(m)) throw std::invalid_argument("sym_eig: matrix not symmetric");
    const int n = m.rows;
    DenseMatrix a = m;
    DenseMatrix v = DenseMatrix::identity(n);

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };

    const double stop = 1e-15 * (1.0 + frobenius_norm(a));
    const int max_sweeps = 100;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = a(p, k) = c * akp - s * akq;
                    a(k, q) = a(q, k) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == max_sweeps && off_norm() > stop)
        throw no_convergence_error("sym_eig: Jacobi sweeps exhausted");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

    SymEig out;
    out.eigvals.resize(n);
    out.eigvecs = DenseMatrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.eigvals[j] = a(order[j], order[j]);
        for (int i = 0; i < n; ++i) out.eigvecs(i, j) = v(i, order[j]);
    }
    return out;
}

inline double min_eigenvalue(const DenseMatrix& m) {
    if (m.rows == 0) return 0.0;
    return sym_eig(m).eigvals.back();
}

// ---------------------------------------------------------------------------
// LU factorization with partial pivoting

struct LuFactor {
    DenseMatrix lu;        // combined L (unit lower) and U
    std::vector<int> perm; // row permutation applied to the input
    int n = 0;
};

inline LuFactor lu_factor(const DenseMatrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("lu_factor: matrix not square");
    const int n = m.rows;
    LuFactor f;
    f.lu = m;
    f.n = n;
    f.perm.resize(n);
    std::iota(f.perm.begin(), f.perm.end(), 0);
    const double scale = std::max(max_abs(m), 1e-300);
    DenseMatrix& a = f.lu;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double cand = std::abs(a(i, k));
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (best <= 1e-15 * scale)
            throw singular_matrix_error("lu_factor: pivot " + std::to_string(k) +
                                        " below tolerance, matrix singular to working precision");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
        }
        const double akk = a(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double factor = a(i, k) / akk;
            a(i, k) = factor;
            if (factor == 0.0) continue;
            for (int j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
        }
    }
    return f;
}

inline Vector lu_solve(const LuFactor& f, const Vector& b) {
    if (static_cast<int>(b.size()) != f.n) throw std::invalid_argument("lu_solve: size mismatch");
    const int n = f.n;
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (int i = 1; i < n; ++i) {
        double s = x[i];
        for (int j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s / f.lu(i, i);
    }
    return x;
}

/// Solve M x = b via LU with partial pivoting. One iterative refinement step
/// keeps the residual near machine precision on mildly ill-conditioned systems.
inline Vector solve_dense(const DenseMatrix& m, const Vector& b) {
    const LuFactor f = lu_factor(m);
    Vector x = lu_solve(f, b);
    Vector r = matvec(m, x) - b;
    const Vector d = lu_solve(f, r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= d[i];
    return x;
}

} // namespace palm
