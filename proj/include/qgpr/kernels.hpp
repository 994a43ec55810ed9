#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Eigenvalues>

#include "qgpr/errors.hpp"
#include "qgpr/linalg.hpp"

namespace qgpr {

/// A point in feature space, length d.
template <typename Scalar> using InputPoint = Vector<Scalar>;

/// Training inputs stored row-wise (n x d) with their targets (length n).
template <typename Scalar> struct TrainingSet {
    Matrix<Scalar> points;
    Vector<Scalar> targets;

    TrainingSet() = default;
    TrainingSet(Matrix<Scalar> pts, Vector<Scalar> y)
        : points(std::move(pts)), targets(std::move(y)) {
        if (points.rows() < 1) {
            throw InputError("training set must contain at least one point");
        }
        if (points.rows() != targets.size()) {
            throw InputError("training inputs and targets differ in length");
        }
        if (points.cols() < 1) {
            throw InputError("training inputs must have dimension >= 1");
        }
        if (!points.allFinite() || !targets.allFinite()) {
            throw InputError("training data contains non-finite values");
        }
    }

    [[nodiscard]] Eigen::Index size() const { return points.rows(); }
    [[nodiscard]] Eigen::Index dim() const { return points.cols(); }
};

enum class KernelFamily { SquaredExponential, CompactSupport };

inline std::string_view to_string(KernelFamily f) {
    return f == KernelFamily::SquaredExponential ? "squared-exponential"
                                                 : "compact-support";
}

inline KernelFamily kernel_family_from(std::string_view name) {
    if (name == "squared-exponential" || name == "se") {
        return KernelFamily::SquaredExponential;
    }
    if (name == "compact-support" || name == "wendland") {
        return KernelFamily::CompactSupport;
    }
    throw InputError("unknown kernel family '" + std::string(name) + "'");
}

/**
 * Covariance function parameters.
 *
 * The squared-exponential family uses signal_variance and lengthscale.
 * The compact-support family is the Wendland function
 *   k(r) = sf2 * max(0, 1 - r/R)^4 * (4 r/R + 1),
 * positive definite for d <= 3 and exactly zero for r >= R.
 */
template <typename Scalar> struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    Scalar signal_variance = 1;
    Scalar lengthscale = 1;
    Scalar cutoff_radius = 1;

    static KernelSpec squared_exponential(Scalar sf2, Scalar ell) {
        KernelSpec k{KernelFamily::SquaredExponential, sf2, ell, Scalar(1)};
        k.validate();
        return k;
    }

    static KernelSpec compact_support(Scalar sf2, Scalar cutoff) {
        KernelSpec k{KernelFamily::CompactSupport, sf2, Scalar(1), cutoff};
        k.validate();
        return k;
    }

    void validate() const {
        auto positive = [](Scalar v) { return std::isfinite(v) && v > 0; };
        if (!positive(signal_variance)) {
            throw InputError("kernel signal variance must be positive");
        }
        if (family == KernelFamily::SquaredExponential && !positive(lengthscale)) {
            throw InputError("kernel lengthscale must be positive");
        }
        if (family == KernelFamily::CompactSupport && !positive(cutoff_radius)) {
            throw InputError("kernel cutoff radius must be positive");
        }
    }
};

template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar eval_kernel(const KernelSpec<Scalar> &spec,
                   const Eigen::MatrixBase<DerivedA> &x,
                   const Eigen::MatrixBase<DerivedB> &x2) {
    if (x.size() != x2.size()) {
        throw InputError("kernel arguments differ in dimension (" +
                         std::to_string(x.size()) + " vs " +
                         std::to_string(x2.size()) + ")");
    }
    const Scalar r2 = (x - x2).squaredNorm();
    switch (spec.family) {
    case KernelFamily::SquaredExponential:
        return spec.signal_variance *
               std::exp(-r2 / (Scalar(2) * spec.lengthscale * spec.lengthscale));
    case KernelFamily::CompactSupport: {
        const Scalar q = std::sqrt(r2) / spec.cutoff_radius;
        if (q >= Scalar(1)) {
            return Scalar(0);
        }
        const Scalar t = Scalar(1) - q;
        return spec.signal_variance * (t * t) * (t * t) * (Scalar(4) * q + Scalar(1));
    }
    }
    return Scalar(0);
}

/// Training data, kernel and noise with the Gram matrix K and the regularized
/// system K + noise_variance * I. Immutable once built.
template <typename Scalar> struct GPModel {
    TrainingSet<Scalar> training;
    KernelSpec<Scalar> kernel;
    Scalar noise_variance = 0;
    Matrix<Scalar> gram;
    Matrix<Scalar> system;

    [[nodiscard]] Eigen::Index size() const { return training.size(); }
    [[nodiscard]] const Vector<Scalar> &targets() const { return training.targets; }
};

template <typename Scalar>
GPModel<Scalar> build_model(TrainingSet<Scalar> training,
                            const KernelSpec<Scalar> &spec,
                            Scalar noise_variance) {
    spec.validate();
    if (!(std::isfinite(noise_variance) && noise_variance > 0)) {
        throw InputError("noise variance must be positive");
    }
    const Eigen::Index n = training.size();
    if (n < 1) {
        throw InputError("training set must contain at least one point");
    }
    Matrix<Scalar> gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const Scalar k = eval_kernel(spec, training.points.row(i).transpose(),
                                         training.points.row(j).transpose());
            if (!std::isfinite(k)) {
                throw NumericError("non-finite kernel value at (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");
            }
            gram(i, j) = k;
            gram(j, i) = k;
        }
    }
    Matrix<Scalar> system = gram;
    system.diagonal().array() += noise_variance;
    return GPModel<Scalar>{std::move(training), spec, noise_variance,
                           std::move(gram), std::move(system)};
}

/// Cross-covariance vector k_* between the training inputs and x_star.
template <typename Scalar, typename Derived>
Vector<Scalar> build_cross(const GPModel<Scalar> &model,
                           const Eigen::MatrixBase<Derived> &x_star) {
    if (x_star.size() != model.training.dim()) {
        throw InputError("test point has dimension " + std::to_string(x_star.size()) +
                         ", model expects " + std::to_string(model.training.dim()));
    }
    if (!x_star.allFinite()) {
        throw InputError("test point has non-finite coordinates");
    }
    Vector<Scalar> k(model.size());
    for (Eigen::Index i = 0; i < model.size(); ++i) {
        k(i) = eval_kernel(model.kernel, model.training.points.row(i).transpose(), x_star);
    }
    return k;
}

/// Prior variance k(x_*, x_*).
template <typename Scalar, typename Derived>
Scalar prior_variance(const GPModel<Scalar> &model,
                      const Eigen::MatrixBase<Derived> &x_star) {
    return eval_kernel(model.kernel, x_star, x_star);
}

template <typename Scalar> struct Diagnostics {
    Scalar kappa = 0;
    Eigen::Index row_sparsity = 0;
    Scalar min_eig = 0;
    Scalar max_eig = 0;
};

/// Max count of entries per row that are not exactly zero.
template <typename Derived>
Eigen::Index row_sparsity(const Eigen::MatrixBase<Derived> &a) {
    Eigen::Index s = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        s = std::max<Eigen::Index>(s, (a.row(i).array() != 0).count());
    }
    return s;
}

template <typename Scalar>
Diagnostics<Scalar> diagnostics(const Matrix<Scalar> &system) {
    if (system.rows() != system.cols() || system.rows() == 0) {
        throw InputError("diagnostics needs a non-empty square matrix");
    }
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(system, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) {
        throw NumericError("eigenvalue computation did not converge");
    }
    Diagnostics<Scalar> d;
    d.min_eig = eig.eigenvalues().minCoeff();
    d.max_eig = eig.eigenvalues().maxCoeff();
    d.row_sparsity = row_sparsity(system);
    if (!(d.min_eig > 0)) {
        throw ConditioningError("system matrix is not positive definite (smallest "
                                "eigenvalue " + std::to_string(d.min_eig) + ")");
    }
    d.kappa = d.max_eig / d.min_eig;
    return d;
}

template <typename Scalar>
Diagnostics<Scalar> diagnostics(const GPModel<Scalar> &model) {
    return diagnostics(model.system);
}

/// Extra jitter needed so that (max + j) / (min + j) <= kappa_bound; 0 when
/// the bound already holds.
template <typename Scalar>
Scalar recommended_jitter(const Diagnostics<Scalar> &d, Scalar kappa_bound) {
    if (!(kappa_bound > 1)) {
        throw InputError("condition-number bound must exceed 1");
    }
    if (d.kappa <= kappa_bound) {
        return Scalar(0);
    }
    return (d.max_eig - kappa_bound * d.min_eig) / (kappa_bound - Scalar(1));
}

} // namespace qgpr
