#pragma once

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "qgpr/errors.hpp"
#include "qgpr/kernels.hpp"
#include "qgpr/linalg.hpp"

namespace qgpr {

/// Lower-triangular L with L * L^T equal to the factored matrix.
template <typename Scalar> struct CholeskyFactor {
    Matrix<Scalar> L;

    [[nodiscard]] Eigen::Index size() const { return L.rows(); }
};

template <typename Scalar> struct Prediction {
    Scalar mean = 0;
    Scalar variance = 0;
};

namespace detail {
template <typename Scalar> void require_square(const Matrix<Scalar> &a, const char *who) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw InputError(std::string(who) + ": matrix must be square and non-empty");
    }
}
} // namespace detail

// Column-oriented Cholesky-Banachiewicz; only the lower triangle is read.
template <typename Scalar>
CholeskyFactor<Scalar> cholesky(const Matrix<Scalar> &system) {
    detail::require_square(system, "cholesky");
    const Eigen::Index n = system.rows();
    Matrix<Scalar> L = Matrix<Scalar>::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Scalar pivot = system(j, j);
        for (Eigen::Index k = 0; k < j; ++k) {
            pivot -= L(j, k) * L(j, k);
        }
        if (!(pivot > 0) || !std::isfinite(pivot)) {
            throw NotPositiveDefiniteError(
                "matrix is not positive definite (pivot " + std::to_string(j) +
                    " = " + std::to_string(pivot) + ")",
                j);
        }
        L(j, j) = std::sqrt(pivot);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            Scalar s = system(i, j);
            for (Eigen::Index k = 0; k < j; ++k) {
                s -= L(i, k) * L(j, k);
            }
            L(i, j) = s / L(j, j);
        }
    }
    return CholeskyFactor<Scalar>{std::move(L)};
}

/// Solves L x = b (the "L \ b" of the classical recipe).
template <typename Scalar>
Vector<Scalar> forward_substitute(const Matrix<Scalar> &L, const Vector<Scalar> &b) {
    const Eigen::Index n = L.rows();
    if (b.size() != n) {
        throw InputError("forward_substitute: dimension mismatch");
    }
    Vector<Scalar> x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Scalar s = b(i);
        for (Eigen::Index k = 0; k < i; ++k) {
            s -= L(i, k) * x(k);
        }
        x(i) = s / L(i, i);
    }
    return x;
}

/// Solves L^T x = b.
template <typename Scalar>
Vector<Scalar> back_substitute_transposed(const Matrix<Scalar> &L, const Vector<Scalar> &b) {
    const Eigen::Index n = L.rows();
    if (b.size() != n) {
        throw InputError("back_substitute_transposed: dimension mismatch");
    }
    Vector<Scalar> x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        Scalar s = b(i);
        for (Eigen::Index k = i + 1; k < n; ++k) {
            s -= L(k, i) * x(k);
        }
        x(i) = s / L(i, i);
    }
    return x;
}

template <typename Scalar>
Vector<Scalar> cholesky_solve(const CholeskyFactor<Scalar> &f, const Vector<Scalar> &b) {
    return back_substitute_transposed(f.L, forward_substitute(f.L, b));
}

/// Mean and variance through one Cholesky factor and triangular solves.
template <typename Scalar>
Prediction<Scalar> predict_exact(const Vector<Scalar> &k_star, Scalar k_star_star,
                                 const Vector<Scalar> &y, const CholeskyFactor<Scalar> &f) {
    if (k_star.size() != f.size() || y.size() != f.size()) {
        throw InputError("predict_exact: dimension mismatch");
    }
    const Vector<Scalar> alpha = cholesky_solve(f, y);
    const Vector<Scalar> w = forward_substitute(f.L, k_star);
    return {k_star.dot(alpha), k_star_star - w.squaredNorm()};
}

template <typename Scalar, typename Derived>
Prediction<Scalar> predict_exact(const GPModel<Scalar> &model,
                                 const Eigen::MatrixBase<Derived> &x_star) {
    const Vector<Scalar> k_star = build_cross(model, x_star);
    return predict_exact(k_star, prior_variance(model, x_star), model.targets(),
                         cholesky(model.system));
}

struct CgStats {
    int iterations = 0;
    double residual = 0;
};

/**
 * Conjugate gradients from a zero initial guess.
 *
 * Stops when ||A x - b|| / ||b|| <= tol; throws IterationLimitError (carrying
 * the final relative residual) if max_iter iterations do not get there.
 */
template <typename Scalar>
Vector<Scalar> cg_solve(const Matrix<Scalar> &system, const Vector<Scalar> &b, Scalar tol,
                        int max_iter, CgStats *stats = nullptr) {
    detail::require_square(system, "cg_solve");
    if (b.size() != system.rows()) {
        throw InputError("cg_solve: dimension mismatch");
    }
    if (!(tol > 0)) {
        throw InputError("cg_solve: tolerance must be positive");
    }
    const Eigen::Index n = b.size();
    Vector<Scalar> x = Vector<Scalar>::Zero(n);
    const Scalar b_norm = b.norm();
    if (b_norm == 0) {
        if (stats) {
            *stats = {0, 0.0};
        }
        return x;
    }
    Vector<Scalar> r = b;
    Vector<Scalar> p = r;
    Scalar rr = r.squaredNorm();
    int it = 0;
    Scalar rel = std::sqrt(rr) / b_norm;
    while (rel > tol) {
        if (it >= max_iter) {
            throw IterationLimitError("conjugate gradients did not converge in " +
                                          std::to_string(max_iter) + " iterations",
                                      static_cast<double>(rel));
        }
        const Vector<Scalar> Ap = system * p;
        const Scalar pAp = p.dot(Ap);
        if (!(pAp > 0)) {
            throw NotPositiveDefiniteError("conjugate gradients met a non-positive curvature",
                                           -1);
        }
        const Scalar alpha = rr / pAp;
        x.noalias() += alpha * p;
        r.noalias() -= alpha * Ap;
        const Scalar rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
        ++it;
        rel = std::sqrt(rr) / b_norm;
    }
    if (stats) {
        *stats = {it, static_cast<double>(rel)};
    }
    return x;
}

/// Explicit inverse; a brute-force oracle for tests and small checks.
template <typename Scalar>
Matrix<Scalar> dense_inverse(const Matrix<Scalar> &system) {
    detail::require_square(system, "dense_inverse");
    Eigen::FullPivLU<Matrix<Scalar>> lu(system);
    if (!lu.isInvertible()) {
        throw NumericError("matrix is singular");
    }
    return lu.inverse();
}

template <typename Scalar, typename Derived>
Prediction<Scalar> predict_cg(const GPModel<Scalar> &model,
                              const Eigen::MatrixBase<Derived> &x_star, Scalar tol = 1e-13) {
    const Vector<Scalar> k_star = build_cross(model, x_star);
    const int max_iter = static_cast<int>(10 * model.size() + 50);
    const Vector<Scalar> alpha = cg_solve(model.system, model.targets(), tol, max_iter);
    const Vector<Scalar> eta = cg_solve(model.system, k_star, tol, max_iter);
    return {k_star.dot(alpha), prior_variance(model, x_star) - k_star.dot(eta)};
}

template <typename Scalar, typename Derived>
Prediction<Scalar> predict_inverse(const GPModel<Scalar> &model,
                                   const Eigen::MatrixBase<Derived> &x_star) {
    const Vector<Scalar> k_star = build_cross(model, x_star);
    const Matrix<Scalar> inv = dense_inverse(model.system);
    return {k_star.dot(inv * model.targets()),
            prior_variance(model, x_star) - k_star.dot(inv * k_star)};
}

} // namespace qgpr
