#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace qgpr {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Real>
using ComplexMatrix = Matrix<std::complex<Real>>;

template <typename Real>
using ComplexVector = Vector<std::complex<Real>>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using MatrixXcd = ComplexMatrix<double>;
using VectorXcd = ComplexVector<double>;

/// Smallest w >= 1 with 2^w >= n.
inline int register_width_for(Eigen::Index n) {
    int w = 1;
    while ((Eigen::Index{1} << w) < n) {
        ++w;
    }
    return w;
}

/// Relative Frobenius distance ||a - b|| / max(||b||, tiny).
template <typename DerivedA, typename DerivedB>
auto relative_error(const Eigen::MatrixBase<DerivedA> &a,
                    const Eigen::MatrixBase<DerivedB> &b) {
    using Real = typename Eigen::NumTraits<typename DerivedA::Scalar>::Real;
    const Real denom = std::max(b.norm(), Real(1e-300));
    return (a - b).norm() / denom;
}

/// Upper bound on the spectral radius from Gershgorin discs.
template <typename Derived>
auto gershgorin_bound(const Eigen::MatrixBase<Derived> &a) {
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

// SplitMix64 finalizer; used to derive independent per-task seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace qgpr
