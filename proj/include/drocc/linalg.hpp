#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "drocc/common.hpp"

namespace drocc {

// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix
// by the cyclic Jacobi method. Dimensions here are tiny (d <= a dozen), so
// robustness and determinism matter more than speed.
struct SymEig {
    std::vector<double> values;
    Matrix vectors;  // column j is the eigenvector for values[j]
};

inline SymEig jacobi_eigen(const Matrix& a_in, int max_sweeps = 64, double tol = 1e-13) {
    const std::size_t n = a_in.rows();
    if (a_in.cols() != n) throw DimensionMismatch("jacobi_eigen: matrix not square");
    Matrix a = a_in;
    Matrix v = Matrix::identity(n);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) < tol) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymEig out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

inline double min_eigenvalue(const Matrix& a) { return jacobi_eigen(a).values.front(); }

// Spectral norm of a (not necessarily square) matrix via the eigenvalues of
// A^T A.
inline double spectral_norm(const Matrix& a) {
    const std::size_t n = a.cols();
    Matrix ata(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
            ata(i, j) = s;
        }
    const double lmax = jacobi_eigen(ata).values.back();
    return std::sqrt(std::max(0.0, lmax));
}

// Indices of a maximal linearly independent subset of the rows, found by
// Gaussian elimination with partial pivoting.
inline std::vector<std::size_t> independent_rows(const Matrix& m, double tol = 1e-10) {
    Matrix work = m;
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<std::size_t> keep;
    std::vector<bool> used(rows, false);
    for (std::size_t col = 0; col < cols && keep.size() < rows; ++col) {
        std::size_t best = SIZE_MAX;
        double best_abs = tol;
        for (std::size_t r = 0; r < rows; ++r) {
            if (used[r]) continue;
            if (std::abs(work(r, col)) > best_abs) {
                best_abs = std::abs(work(r, col));
                best = r;
            }
        }
        if (best == SIZE_MAX) continue;
        used[best] = true;
        keep.push_back(best);
        for (std::size_t r = 0; r < rows; ++r) {
            if (used[r]) continue;
            const double f = work(r, col) / work(best, col);
            if (f == 0.0) continue;
            for (std::size_t j = col; j < cols; ++j) work(r, j) -= f * work(best, j);
        }
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

// Solves a square linear system by Gaussian elimination with partial
// pivoting. Returns false if the matrix is numerically singular.
inline bool solve_linear(Matrix a, std::vector<double> b, std::vector<double>& x,
                         double pivot_tol = 1e-12) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw DimensionMismatch("solve_linear: bad shapes");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(best, col))) best = r;
        if (std::abs(a(best, col)) < pivot_tol) return false;
        if (best != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(best, j));
            std::swap(b[col], b[best]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return true;
}

}  // namespace drocc
