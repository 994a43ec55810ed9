#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qgpr/errors.hpp"
#include "qgpr/linalg.hpp"
#include "qgpr/statevector.hpp"

namespace qgpr {

/// Register names shared by the linear-systems and interference circuits.
namespace reg {
inline constexpr std::string_view kBranch = "A";  // |+> branch selector
inline constexpr std::string_view kIndex = "B";   // vector index / solution
inline constexpr std::string_view kFlag = "C";    // state-preparation flag
inline constexpr std::string_view kAncilla = "D"; // inversion ancilla
inline constexpr std::string_view kClock = "E";   // phase-estimation clock
} // namespace reg

/**
 * Phase-estimation parameters.
 *
 * Clock value tau applies exp(i A t0 tau), so an eigenvalue lambda lands on
 * clock value lambda t0 T / (2 pi) and clock value k decodes to
 * 2 pi k / (t0 T). Requires t0 * lambda_max < 2 pi and c <= lambda_min.
 */
template <typename Real> struct QlaConfig {
    int clock_qubits = 8;
    Real t0 = 1;
    Real c = 1;
    Real epsilon = Real(1e-2);

    [[nodiscard]] std::uint64_t clock_size() const { return std::uint64_t{1} << clock_qubits; }

    [[nodiscard]] Real estimated_eigenvalue(std::uint64_t k) const {
        return Real(2) * std::numbers::pi_v<Real> * static_cast<Real>(k) /
               (t0 * static_cast<Real>(clock_size()));
    }

    /**
     * Default evolution time t0 = pi / bound: the Gershgorin bound maps to
     * clock value T / 2. Eigenvalues close to the top of the clock range leak
     * cyclically into the lowest clock values, where 1 / lambda~ is largest,
     * so half of the range is kept as headroom.
     */
    static QlaConfig automatic(const Matrix<Real> &system, int clock_qubits, Real c) {
        if (clock_qubits < 1) {
            throw InputError("clock_qubits must be >= 1");
        }
        const Real bound = std::max(gershgorin_bound(system), c);
        QlaConfig cfg;
        cfg.clock_qubits = clock_qubits;
        cfg.t0 = std::numbers::pi_v<Real> / bound;
        cfg.c = c;
        return cfg;
    }

    void validate() const {
        if (clock_qubits < 1) {
            throw InputError("clock_qubits must be >= 1");
        }
        if (!(t0 > 0) || !(c > 0) || !(epsilon > 0)) {
            throw InputError("t0, c and epsilon must be positive");
        }
    }

    /// Throws ConfigError if some eigenvalue phase t0 * lambda leaves [0, 2 pi).
    void validate_phases(const Matrix<Real> &system) const {
        Eigen::SelfAdjointEigenSolver<Matrix<Real>> eig(system, Eigen::EigenvaluesOnly);
        check_phase_range(eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff());
    }

    /// Throws ConfigError when the matrix violates the wraparound or rotation bounds.
    void validate_against(const Matrix<Real> &system) const {
        validate();
        Eigen::SelfAdjointEigenSolver<Matrix<Real>> eig(system, Eigen::EigenvaluesOnly);
        const Real lo = eig.eigenvalues().minCoeff();
        const Real hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 0)) {
            throw ConditioningError("system matrix is not positive definite");
        }
        check_phase_range(lo, hi);
        if (c > lo * (Real(1) + Real(1e-9)) + Real(1e-12)) {
            throw ConfigError("inversion constant c = " + std::to_string(c) +
                              " exceeds lambda_min = " + std::to_string(lo));
        }
    }

  private:
    void check_phase_range(Real lo, Real hi) const {
        if (lo < 0) {
            throw ConfigError("negative eigenvalue " + std::to_string(lo) +
                              " aliases onto the top of the clock range");
        }
        if (!(t0 * hi < Real(2) * std::numbers::pi_v<Real>)) {
            throw ConfigError("t0 * lambda_max = " + std::to_string(t0 * hi) +
                              " wraps the clock phase (must be < 2 pi)");
        }
    }
};

/// Nonzero entries of a vector with the rotation scale c_v = 1 / max |v_i|.
template <typename Real> struct SparseEncoding {
    Eigen::Index length = 0;
    std::vector<Eigen::Index> support;
    std::vector<Real> values;
    Real scale = 1;

    [[nodiscard]] Eigen::Index sparsity() const { return static_cast<Eigen::Index>(support.size()); }

    [[nodiscard]] Vector<Real> dense() const {
        Vector<Real> v = Vector<Real>::Zero(length);
        for (std::size_t k = 0; k < support.size(); ++k) {
            v(support[k]) = values[k];
        }
        return v;
    }

    /// Probability of the flag reading 1 after preparation: c^2 ||v||^2 / s.
    [[nodiscard]] Real flag_probability() const {
        Real ss = 0;
        for (Real x : values) {
            ss += x * x;
        }
        return scale * scale * ss / static_cast<Real>(sparsity());
    }
};

template <typename Real>
SparseEncoding<Real> make_encoding(const Vector<Real> &v) {
    SparseEncoding<Real> enc;
    enc.length = v.size();
    Real vmax = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v(i))) {
            throw InputError("cannot encode a non-finite entry");
        }
        if (v(i) != 0) {
            enc.support.push_back(i);
            enc.values.push_back(v(i));
            vmax = std::max(vmax, std::abs(v(i)));
        }
    }
    if (enc.support.empty()) {
        throw InputError("cannot encode an all-zero vector");
    }
    enc.scale = Real(1) / vmax;
    return enc;
}

/**
 * Prepares s^{-1/2} sum_{i in support} |i>_index (sqrt(1 - c^2 v_i^2)|0> + c v_i |1>)_flag
 * on the controlled subspace; index and flag must start in |0>.
 * Amplitudes are loaded directly (QRAM assumption).
 */
template <typename Real>
void prepare_sparse_state(StateVector<Real> &state, std::string_view index_reg,
                          std::string_view flag_qubit, const SparseEncoding<Real> &enc,
                          std::span<const Control> controls = {}) {
    const RegisterLayout &layout = state.layout();
    const std::uint64_t dim = std::uint64_t{1} << layout.width(index_reg);
    if (layout.width(flag_qubit) != 1) {
        throw InputError("flag register must be a single qubit");
    }
    if (static_cast<std::uint64_t>(enc.length) > dim) {
        throw InputError("index register too narrow for the encoded vector");
    }
    ComplexVector<Real> uniform = ComplexVector<Real>::Zero(static_cast<Eigen::Index>(dim));
    const Real amp = Real(1) / std::sqrt(static_cast<Real>(enc.sparsity()));
    for (Eigen::Index i : enc.support) {
        uniform(i) = amp;
    }
    detail::apply_matrix(state.mutable_amplitudes(), gates::state_preparation<Real>(uniform),
                         layout.qubits(index_reg), controls);
    const std::vector<Control> base(controls.begin(), controls.end());
    const int flag[] = {layout.qubit(flag_qubit, 0)};
    for (std::size_t k = 0; k < enc.support.size(); ++k) {
        const Real x = std::clamp(enc.scale * enc.values[k], Real(-1), Real(1));
        const auto ctrl = base + register_equals(layout, index_reg,
                                                 static_cast<std::uint64_t>(enc.support[k]));
        detail::apply_matrix(state.mutable_amplitudes(), gates::ry<Real>(Real(2) * std::asin(x)),
                             flag, ctrl);
    }
}

/// Fresh state on `layout` (all registers |0>) with |v~> prepared.
template <typename Real>
StateVector<Real> prepare_sparse_state(const RegisterLayout &layout, std::string_view index_reg,
                                       std::string_view flag_qubit, const SparseEncoding<Real> &enc) {
    std::vector<std::uint64_t> zeros(layout.num_registers(), 0);
    StateVector<Real> state = init_basis<Real>(layout, zeros);
    prepare_sparse_state(state, index_reg, flag_qubit, enc);
    return state;
}

/// Embeds a system into dimension 2^w by a direct sum with fill * I.
template <typename Real>
Matrix<Real> pad_system(const Matrix<Real> &system, Real fill) {
    const Eigen::Index n = system.rows();
    const Eigen::Index dim = Eigen::Index{1} << register_width_for(n);
    Matrix<Real> padded = Matrix<Real>::Zero(dim, dim);
    padded.topLeftCorner(n, n) = system;
    for (Eigen::Index i = n; i < dim; ++i) {
        padded(i, i) = fill;
    }
    return padded;
}

template <typename Real> Vector<Real> pad_vector(const Vector<Real> &v) {
    Vector<Real> out = Vector<Real>::Zero(Eigen::Index{1} << register_width_for(v.size()));
    out.head(v.size()) = v;
    return out;
}

/// Hadamards on the clock, controlled evolution, inverse QFT on the clock.
template <typename Real>
void phase_estimate(StateVector<Real> &state, std::string_view clock, std::string_view target,
                    const Matrix<Real> &system, const QlaConfig<Real> &config,
                    std::span<const Control> controls = {}) {
    if (state.layout().width(clock) != config.clock_qubits) {
        throw InputError("clock register width differs from config.clock_qubits");
    }
    config.validate_phases(system);
    hadamard_all(state, clock, controls);
    controlled_evolution(state, clock, target, system,
                         config.t0 * static_cast<Real>(config.clock_size()), controls);
    qft(state, clock, /*inverse=*/true, controls);
}

/// Exact inverse of phase_estimate.
template <typename Real>
void unphase_estimate(StateVector<Real> &state, std::string_view clock, std::string_view target,
                      const Matrix<Real> &system, const QlaConfig<Real> &config,
                      std::span<const Control> controls = {}) {
    qft(state, clock, /*inverse=*/false, controls);
    controlled_evolution(state, clock, target, system,
                         -config.t0 * static_cast<Real>(config.clock_size()), controls);
    hadamard_all(state, clock, controls);
}

struct InversionStats {
    /// Clock values whose decoded eigenvalue fell below c (rotation clamped).
    int clamped_branches = 0;
    /// Probability mass sitting on those clock values.
    double clamped_probability = 0;
};

/**
 * For each clock value k >= 1, rotates the ancilla by 2 asin(c / lambda_k)
 * with lambda_k = 2 pi k / (t0 T), clamped at c / lambda_k = 1. The k = 0
 * branch is left untouched.
 */
template <typename Real>
InversionStats eigenvalue_inversion(StateVector<Real> &state, std::string_view clock,
                                    std::string_view ancilla, const QlaConfig<Real> &config,
                                    std::span<const Control> controls = {}) {
    const RegisterLayout &layout = state.layout();
    if (layout.width(ancilla) != 1) {
        throw InputError("inversion ancilla must be a single qubit");
    }
    InversionStats stats;
    const std::vector<Control> base(controls.begin(), controls.end());
    const int target[] = {layout.qubit(ancilla, 0)};
    std::vector<Real> clock_mass;
    for (std::uint64_t k = 1; k < config.clock_size(); ++k) {
        Real ratio = config.c / config.estimated_eigenvalue(k);
        if (ratio > Real(1)) {
            ratio = Real(1);
            ++stats.clamped_branches;
            if (clock_mass.empty()) {
                clock_mass = outcome_probabilities(state, clock);
            }
            stats.clamped_probability += static_cast<double>(clock_mass[k]);
        }
        detail::apply_matrix(state.mutable_amplitudes(), gates::ry<Real>(Real(2) * std::asin(ratio)),
                             target, base + register_equals(layout, clock, k));
    }
    return stats;
}

template <typename Real> struct QlaResult {
    /// Post-selected (ancilla = 1) state on registers B, D, E.
    StateVector<Real> state;
    Real success_probability = 0;
    /// Population of the clock outside |0...0> after uncomputation.
    Real clock_residual = 0;
    InversionStats inversion;
};

/**
 * Linear-systems pipeline on an amplitude-loaded right-hand side: phase
 * estimation, eigenvalue inversion, uncomputation, post-selection on the
 * ancilla. The system is padded with c * I to a power-of-two dimension.
 */
template <typename Real>
QlaResult<Real> qla_solve(const Vector<Real> &b, const Matrix<Real> &system,
                          const QlaConfig<Real> &config) {
    if (system.rows() != system.cols() || system.rows() != b.size()) {
        throw InputError("qla_solve: dimension mismatch");
    }
    const Real b_norm = b.norm();
    if (!(b_norm > 0)) {
        throw InputError("qla_solve: right-hand side is zero");
    }
    const Matrix<Real> padded = pad_system(system, config.c);
    config.validate_against(padded);
    const int w = register_width_for(system.rows());
    const RegisterLayout layout({{std::string(reg::kIndex), w},
                                 {std::string(reg::kAncilla), 1},
                                 {std::string(reg::kClock), config.clock_qubits}});
    StateVector<Real> state = init_basis<Real>(layout, {0, 0, 0});
    const ComplexVector<Real> b_hat = (pad_vector<Real>(b) / b_norm).template cast<std::complex<Real>>();
    apply_register_gate(state, reg::kIndex, gates::state_preparation<Real>(b_hat));

    phase_estimate(state, reg::kClock, reg::kIndex, padded, config);
    const InversionStats inv = eigenvalue_inversion(state, reg::kClock, reg::kAncilla, config);
    unphase_estimate(state, reg::kClock, reg::kIndex, padded, config);

    Projection<Real> post = project(state, reg::kAncilla, 1);
    const Real clock_residual = Real(1) - outcome_probabilities(post.state, reg::kClock)[0];
    return {std::move(post.state), post.probability, std::max(clock_residual, Real(0)), inv};
}

template <typename Real>
QlaResult<Real> qla_solve(const SparseEncoding<Real> &b, const Matrix<Real> &system,
                          const QlaConfig<Real> &config) {
    return qla_solve(b.dense(), system, config);
}

/// sqrt(<x| rho_B |x>) for the normalized exact solution x = A^{-1} b / ||A^{-1} b||.
template <typename Real>
Real solution_fidelity(const QlaResult<Real> &result, const Vector<Real> &exact_solution) {
    const Vector<Real> x = pad_vector<Real>(exact_solution).normalized();
    return std::sqrt(register_overlap(result.state, reg::kIndex,
                                      ComplexVector<Real>(x.template cast<std::complex<Real>>())));
}

/// [[0, A], [A^dagger, 0]]; eigenvalues are the +- singular values of A.
template <typename Derived>
auto hermitianize(const Eigen::MatrixBase<Derived> &a) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index m = a.rows(), n = a.cols();
    Matrix<Scalar> h = Matrix<Scalar>::Zero(m + n, m + n);
    h.topRightCorner(m, n) = a;
    h.bottomLeftCorner(n, m) = a.adjoint();
    return h;
}

} // namespace qgpr
