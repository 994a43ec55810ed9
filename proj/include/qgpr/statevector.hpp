#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qgpr/errors.hpp"
#include "qgpr/linalg.hpp"

namespace qgpr {

inline constexpr int kDefaultQubitCap = 22;

struct Register {
    std::string name;
    int width = 1;
};

/**
 * Ordered list of named registers.
 *
 * The first register holds the most significant bits of a basis index. Inside
 * a register, qubit 0 is the least significant bit of the register's value.
 */
class RegisterLayout {
  public:
    RegisterLayout() = default;

    explicit RegisterLayout(std::vector<Register> registers, int qubit_cap = kDefaultQubitCap)
        : registers_(std::move(registers)) {
        if (registers_.empty()) {
            throw InputError("layout needs at least one register");
        }
        for (std::size_t r = 0; r < registers_.size(); ++r) {
            if (registers_[r].width < 1) {
                throw InputError("register '" + registers_[r].name + "' has width < 1");
            }
            for (std::size_t q = 0; q < r; ++q) {
                if (registers_[q].name == registers_[r].name) {
                    throw InputError("duplicate register name '" + registers_[r].name + "'");
                }
            }
            total_ += registers_[r].width;
        }
        if (total_ > qubit_cap) {
            throw InputError("layout needs " + std::to_string(total_) +
                             " qubits, cap is " + std::to_string(qubit_cap));
        }
        offsets_.resize(registers_.size());
        int offset = total_;
        for (std::size_t r = 0; r < registers_.size(); ++r) {
            offset -= registers_[r].width;
            offsets_[r] = offset;
        }
    }

    [[nodiscard]] int total_qubits() const { return total_; }
    [[nodiscard]] std::uint64_t dimension() const { return std::uint64_t{1} << total_; }
    [[nodiscard]] std::size_t num_registers() const { return registers_.size(); }
    [[nodiscard]] const std::vector<Register> &registers() const { return registers_; }

    [[nodiscard]] bool contains(std::string_view name) const {
        return std::any_of(registers_.begin(), registers_.end(),
                           [&](const Register &r) { return r.name == name; });
    }

    [[nodiscard]] std::size_t index_of(std::string_view name) const {
        for (std::size_t r = 0; r < registers_.size(); ++r) {
            if (registers_[r].name == name) {
                return r;
            }
        }
        throw InputError("no register named '" + std::string(name) + "'");
    }

    [[nodiscard]] int width(std::string_view name) const {
        return registers_[index_of(name)].width;
    }

    /// Global bit position of the register's qubit 0.
    [[nodiscard]] int offset(std::string_view name) const { return offsets_[index_of(name)]; }

    [[nodiscard]] int qubit(std::string_view name, int q) const {
        const std::size_t r = index_of(name);
        if (q < 0 || q >= registers_[r].width) {
            throw InputError("qubit " + std::to_string(q) + " outside register '" +
                             std::string(name) + "'");
        }
        return offsets_[r] + q;
    }

    [[nodiscard]] std::vector<int> qubits(std::string_view name) const {
        const std::size_t r = index_of(name);
        std::vector<int> out(registers_[r].width);
        for (int q = 0; q < registers_[r].width; ++q) {
            out[q] = offsets_[r] + q;
        }
        return out;
    }

    /// Value held by a register in the given basis index.
    [[nodiscard]] std::uint64_t value(std::uint64_t basis, std::string_view name) const {
        const std::size_t r = index_of(name);
        return (basis >> offsets_[r]) & ((std::uint64_t{1} << registers_[r].width) - 1);
    }

    /// Basis index with each register holding values[r].
    [[nodiscard]] std::uint64_t compose(std::span<const std::uint64_t> values) const {
        if (values.size() != registers_.size()) {
            throw InputError("expected one basis value per register");
        }
        std::uint64_t basis = 0;
        for (std::size_t r = 0; r < registers_.size(); ++r) {
            if (values[r] >> registers_[r].width) {
                throw InputError("basis value " + std::to_string(values[r]) +
                                 " overflows register '" + registers_[r].name + "'");
            }
            basis |= values[r] << offsets_[r];
        }
        return basis;
    }

  private:
    std::vector<Register> registers_;
    std::vector<int> offsets_;
    int total_ = 0;
};

/// Condition "global qubit `qubit` is in state `value`".
struct Control {
    int qubit = 0;
    bool value = true;
};

inline std::vector<Control> register_equals(const RegisterLayout &layout, std::string_view name,
                                            std::uint64_t value) {
    const int w = layout.width(name);
    if (value >> w) {
        throw InputError("control value overflows register '" + std::string(name) + "'");
    }
    std::vector<Control> out;
    out.reserve(w);
    for (int q = 0; q < w; ++q) {
        out.push_back({layout.qubit(name, q), ((value >> q) & 1U) != 0});
    }
    return out;
}

inline std::vector<Control> operator+(std::vector<Control> a, const std::vector<Control> &b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

template <typename Real> class StateVector {
  public:
    using Complex = std::complex<Real>;

    StateVector() = default;

    StateVector(RegisterLayout layout, ComplexVector<Real> amplitudes)
        : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
        if (static_cast<std::uint64_t>(amps_.size()) != layout_.dimension()) {
            throw InputError("amplitude count does not match layout dimension");
        }
        if (std::abs(amps_.norm() - Real(1)) > Real(1e-10)) {
            throw InputError("state amplitudes are not normalized");
        }
    }

    [[nodiscard]] const RegisterLayout &layout() const { return layout_; }
    [[nodiscard]] const ComplexVector<Real> &amplitudes() const { return amps_; }
    [[nodiscard]] Complex amplitude(std::uint64_t basis) const { return amps_(basis); }
    [[nodiscard]] Real norm() const { return amps_.norm(); }

    // Raw access for circuit primitives in this library; callers are
    // responsible for keeping the state normalized.
    [[nodiscard]] ComplexVector<Real> &mutable_amplitudes() { return amps_; }

  private:
    RegisterLayout layout_;
    ComplexVector<Real> amps_;
};

using StateVectorXd = StateVector<double>;

template <typename Real>
StateVector<Real> init_basis(const RegisterLayout &layout, std::span<const std::uint64_t> values) {
    ComplexVector<Real> amps = ComplexVector<Real>::Zero(layout.dimension());
    amps(layout.compose(values)) = Real(1);
    return StateVector<Real>(layout, std::move(amps));
}

template <typename Real>
StateVector<Real> init_basis(const RegisterLayout &layout,
                             std::initializer_list<std::uint64_t> values) {
    return init_basis<Real>(layout, std::span<const std::uint64_t>(values.begin(), values.size()));
}

namespace gates {
template <typename Real> ComplexMatrix<Real> hadamard() {
    ComplexMatrix<Real> h(2, 2);
    const Real s = Real(1) / std::sqrt(Real(2));
    h << s, s, s, -s;
    return h;
}

template <typename Real> ComplexMatrix<Real> pauli_x() {
    ComplexMatrix<Real> x(2, 2);
    x << 0, 1, 1, 0;
    return x;
}

/// exp(-i theta Y / 2): |0> -> cos(theta/2)|0> + sin(theta/2)|1>.
template <typename Real> ComplexMatrix<Real> ry(Real theta) {
    ComplexMatrix<Real> r(2, 2);
    const Real c = std::cos(theta / 2), s = std::sin(theta / 2);
    r << c, -s, s, c;
    return r;
}

template <typename Real> ComplexMatrix<Real> projector(int bit) {
    ComplexMatrix<Real> p = ComplexMatrix<Real>::Zero(2, 2);
    p(bit, bit) = Real(1);
    return p;
}

/// Unitary taking |0> to the (normalized) column `target`, via a phased
/// Householder reflection.
template <typename Real>
ComplexMatrix<Real> state_preparation(const ComplexVector<Real> &target) {
    using Complex = std::complex<Real>;
    const Eigen::Index dim = target.size();
    if (std::abs(target.norm() - Real(1)) > Real(1e-10)) {
        throw InputError("state_preparation target must be normalized");
    }
    const Complex t0 = target(0);
    const Complex phase = std::abs(t0) > 0 ? t0 / std::abs(t0) : Complex(1);
    ComplexVector<Real> w = target;
    w(0) -= phase;
    const Real ww = w.squaredNorm();
    ComplexMatrix<Real> u = ComplexMatrix<Real>::Identity(dim, dim);
    if (ww > Real(0)) {
        u -= (Real(2) / ww) * (w * w.adjoint());
    }
    return phase * u;
}

template <typename Real> ComplexMatrix<Real> qft_matrix(int width, bool inverse) {
    const Eigen::Index dim = Eigen::Index{1} << width;
    ComplexMatrix<Real> f(dim, dim);
    const Real sign = inverse ? Real(-1) : Real(1);
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(dim));
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            // reduce jk mod dim before scaling to keep the angle small
            const auto jk = static_cast<Real>((j * k) % dim);
            const Real angle = sign * Real(2) * std::numbers::pi_v<Real> * jk / static_cast<Real>(dim);
            f(k, j) = scale * std::complex<Real>(std::cos(angle), std::sin(angle));
        }
    }
    return f;
}
} // namespace gates

template <typename Derived> bool is_unitary(const Eigen::MatrixBase<Derived> &u, double tol = 1e-10) {
    if (u.rows() != u.cols()) {
        return false;
    }
    const auto n = u.rows();
    return ((u.adjoint() * u) - Derived::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived> bool is_hermitian(const Eigen::MatrixBase<Derived> &a, double tol = 1e-10) {
    return a.rows() == a.cols() && (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

namespace detail {

// Applies `op` (dimension 2^k, any matrix) to the target qubits on the
// subspace selected by `controls`. targets[0] is the least significant bit of
// op's index.
template <typename Real>
void apply_matrix(ComplexVector<Real> &amps, const ComplexMatrix<Real> &op,
                  std::span<const int> targets, std::span<const Control> controls) {
    const int k = static_cast<int>(targets.size());
    const std::uint64_t sub = std::uint64_t{1} << k;
    std::uint64_t target_mask = 0;
    for (int t : targets) {
        target_mask |= std::uint64_t{1} << t;
    }
    std::uint64_t ctrl_mask = 0, ctrl_value = 0;
    for (const Control &c : controls) {
        const std::uint64_t bit = std::uint64_t{1} << c.qubit;
        if (bit & target_mask) {
            throw InputError("control qubit overlaps a target qubit");
        }
        if ((ctrl_mask & bit) && (((ctrl_value & bit) != 0) != c.value)) {
            return; // contradictory controls select nothing
        }
        ctrl_mask |= bit;
        if (c.value) {
            ctrl_value |= bit;
        }
    }
    std::vector<std::uint64_t> offsets(sub);
    for (std::uint64_t j = 0; j < sub; ++j) {
        std::uint64_t o = 0;
        for (int b = 0; b < k; ++b) {
            if ((j >> b) & 1U) {
                o |= std::uint64_t{1} << targets[b];
            }
        }
        offsets[j] = o;
    }
    ComplexVector<Real> in(static_cast<Eigen::Index>(sub));
    const auto dim = static_cast<std::uint64_t>(amps.size());
    for (std::uint64_t base = 0; base < dim; ++base) {
        if ((base & target_mask) != 0 || (base & ctrl_mask) != ctrl_value) {
            continue;
        }
        for (std::uint64_t j = 0; j < sub; ++j) {
            in(j) = amps(base | offsets[j]);
        }
        for (std::uint64_t r = 0; r < sub; ++r) {
            std::complex<Real> acc(0);
            for (std::uint64_t j = 0; j < sub; ++j) {
                acc += op(r, j) * in(j);
            }
            amps(base | offsets[r]) = acc;
        }
    }
}

} // namespace detail

/// Applies a (controlled) unitary. Throws InputError if `gate` is not unitary
/// to 1e-10 or its size does not match the target count.
template <typename Real>
void apply_gate(StateVector<Real> &state, const ComplexMatrix<Real> &gate,
                std::span<const int> targets, std::span<const Control> controls = {}) {
    if (gate.rows() != (Eigen::Index{1} << targets.size()) || gate.cols() != gate.rows()) {
        throw InputError("gate dimension does not match target count");
    }
    if (!is_unitary(gate)) {
        throw InputError("gate is not unitary");
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0 || targets[i] >= state.layout().total_qubits()) {
            throw InputError("target qubit out of range");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (targets[i] == targets[j]) {
                throw InputError("duplicate target qubit");
            }
        }
    }
    detail::apply_matrix(state.mutable_amplitudes(), gate, targets, controls);
}

template <typename Real>
void apply_register_gate(StateVector<Real> &state, std::string_view reg,
                         const ComplexMatrix<Real> &gate, std::span<const Control> controls = {}) {
    const std::vector<int> targets = state.layout().qubits(reg);
    apply_gate(state, gate, targets, controls);
}

/// Hadamard on each qubit of a register.
template <typename Real>
void hadamard_all(StateVector<Real> &state, std::string_view reg,
                  std::span<const Control> controls = {}) {
    const ComplexMatrix<Real> h = gates::hadamard<Real>();
    for (int q : state.layout().qubits(reg)) {
        const int t[] = {q};
        detail::apply_matrix(state.mutable_amplitudes(), h, t, controls);
    }
}

/// Quantum Fourier transform |j> -> T^{-1/2} sum_k exp(2 pi i j k / T) |k>
/// on one register (conjugate phases when inverse).
template <typename Real>
void qft(StateVector<Real> &state, std::string_view reg, bool inverse,
         std::span<const Control> controls = {}) {
    const std::vector<int> targets = state.layout().qubits(reg);
    const ComplexMatrix<Real> f = gates::qft_matrix<Real>(static_cast<int>(targets.size()), inverse);
    detail::apply_matrix(state.mutable_amplitudes(), f, targets, controls);
}

/// exp(i A t) through the eigendecomposition of the Hermitian matrix A.
template <typename Derived>
auto evolution_unitary(const Eigen::MatrixBase<Derived> &system,
                       typename Eigen::NumTraits<typename Derived::Scalar>::Real t) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    if (!is_hermitian(system)) {
        throw InputError("evolution requires a Hermitian matrix");
    }
    const ComplexMatrix<Real> a = system.template cast<std::complex<Real>>();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> eig(a);
    if (eig.info() != Eigen::Success) {
        throw NumericError("eigendecomposition failed");
    }
    ComplexVector<Real> phases(eig.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        const Real angle = eig.eigenvalues()(i) * t;
        phases(i) = std::complex<Real>(std::cos(angle), std::sin(angle));
    }
    return ComplexMatrix<Real>(eig.eigenvectors() * phases.asDiagonal() *
                               eig.eigenvectors().adjoint());
}

/**
 * sum_tau |tau><tau|_clock (x) exp(i A t tau / T) on the target register, with
 * T = 2^width(clock). Extra controls restrict the whole operation.
 */
template <typename Real, typename Derived>
void controlled_evolution(StateVector<Real> &state, std::string_view clock,
                          std::string_view target, const Eigen::MatrixBase<Derived> &system,
                          Real t, std::span<const Control> controls = {}) {
    const RegisterLayout &layout = state.layout();
    const Eigen::Index dim = Eigen::Index{1} << layout.width(target);
    if (system.rows() != dim || system.cols() != dim) {
        throw InputError("system dimension " + std::to_string(system.rows()) +
                         " does not match target register dimension " + std::to_string(dim));
    }
    if (!is_hermitian(system)) {
        throw InputError("evolution requires a Hermitian matrix");
    }
    const ComplexMatrix<Real> a = system.template cast<std::complex<Real>>();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> eig(a);
    const auto &vecs = eig.eigenvectors();
    const std::uint64_t T = std::uint64_t{1} << layout.width(clock);
    const std::vector<int> targets = layout.qubits(target);
    const std::vector<Control> base(controls.begin(), controls.end());
    ComplexVector<Real> phases(dim);
    for (std::uint64_t tau = 0; tau < T; ++tau) {
        if (tau == 0) {
            continue; // identity
        }
        for (Eigen::Index i = 0; i < dim; ++i) {
            const Real angle = eig.eigenvalues()(i) * t * static_cast<Real>(tau) / static_cast<Real>(T);
            phases(i) = std::complex<Real>(std::cos(angle), std::sin(angle));
        }
        const ComplexMatrix<Real> u = vecs * phases.asDiagonal() * vecs.adjoint();
        const std::vector<Control> ctrl = base + register_equals(layout, clock, tau);
        detail::apply_matrix(state.mutable_amplitudes(), u, targets, ctrl);
    }
}

enum class FactorKind { Identity, PauliX, ProjectZero, ProjectOne, Custom };

/// Tensor product of one Hermitian factor per register; unlisted registers
/// carry the identity.
template <typename Real> class Observable {
  public:
    Observable() = default;
    explicit Observable(RegisterLayout layout) : layout_(std::move(layout)) {}

    Observable &set(std::string_view reg, FactorKind kind) {
        const int w = layout_.width(reg);
        if (kind == FactorKind::Custom) {
            throw InputError("custom factors need an explicit matrix");
        }
        if (kind != FactorKind::Identity && w != 1) {
            throw InputError("X and projector factors apply to 1-qubit registers");
        }
        factors_[std::string(reg)] = Factor{kind, {}};
        return *this;
    }

    Observable &set(std::string_view reg, ComplexMatrix<Real> matrix) {
        const Eigen::Index dim = Eigen::Index{1} << layout_.width(reg);
        if (matrix.rows() != dim || matrix.cols() != dim) {
            throw InputError("custom factor dimension does not match register");
        }
        if (!is_hermitian(matrix)) {
            throw InputError("observable factor is not Hermitian");
        }
        factors_[std::string(reg)] = Factor{FactorKind::Custom, std::move(matrix)};
        return *this;
    }

    [[nodiscard]] const RegisterLayout &layout() const { return layout_; }

    [[nodiscard]] FactorKind kind(std::string_view reg) const {
        auto it = factors_.find(std::string(reg));
        return it == factors_.end() ? FactorKind::Identity : it->second.kind;
    }

    /// Matrix of the factor on a register (identity when unset).
    [[nodiscard]] ComplexMatrix<Real> factor_matrix(std::string_view reg) const {
        const Eigen::Index dim = Eigen::Index{1} << layout_.width(reg);
        auto it = factors_.find(std::string(reg));
        if (it == factors_.end()) {
            return ComplexMatrix<Real>::Identity(dim, dim);
        }
        switch (it->second.kind) {
        case FactorKind::Identity:
            return ComplexMatrix<Real>::Identity(dim, dim);
        case FactorKind::PauliX:
            return gates::pauli_x<Real>();
        case FactorKind::ProjectZero:
            return gates::projector<Real>(0);
        case FactorKind::ProjectOne:
            return gates::projector<Real>(1);
        case FactorKind::Custom:
            return it->second.matrix;
        }
        return {};
    }

    /// Registers with a non-identity factor, in layout order.
    [[nodiscard]] std::vector<std::string> active_registers() const {
        std::vector<std::string> out;
        for (const Register &r : layout_.registers()) {
            if (kind(r.name) != FactorKind::Identity) {
                out.push_back(r.name);
            }
        }
        return out;
    }

  private:
    struct Factor {
        FactorKind kind = FactorKind::Identity;
        ComplexMatrix<Real> matrix;
    };
    RegisterLayout layout_;
    std::map<std::string, Factor, std::less<>> factors_;
};

namespace detail {
template <typename Real>
void check_same_layout(const StateVector<Real> &state, const Observable<Real> &obs) {
    const auto &a = state.layout().registers();
    const auto &b = obs.layout().registers();
    const bool same = a.size() == b.size() &&
                      std::equal(a.begin(), a.end(), b.begin(), [](const Register &x, const Register &y) {
                          return x.name == y.name && x.width == y.width;
                      });
    if (!same) {
        throw InputError("observable layout does not match the state");
    }
}
} // namespace detail

/// <psi| M |psi> (real part; imaginary residue is round-off for Hermitian M).
template <typename Real>
Real expectation(const StateVector<Real> &state, const Observable<Real> &obs) {
    detail::check_same_layout(state, obs);
    ComplexVector<Real> m_psi = state.amplitudes();
    for (const std::string &reg : obs.active_registers()) {
        const std::vector<int> targets = state.layout().qubits(reg);
        detail::apply_matrix<Real>(m_psi, obs.factor_matrix(reg), targets, {});
    }
    return state.amplitudes().dot(m_psi).real();
}

/// Probability of each value of a register.
template <typename Real>
std::vector<Real> outcome_probabilities(const StateVector<Real> &state, std::string_view reg) {
    const RegisterLayout &layout = state.layout();
    std::vector<Real> probs(std::size_t{1} << layout.width(reg), Real(0));
    for (std::uint64_t i = 0; i < layout.dimension(); ++i) {
        probs[layout.value(i, reg)] += std::norm(state.amplitude(i));
    }
    return probs;
}

template <typename Real> struct Projection {
    Real probability = 0;
    StateVector<Real> state;
};

/// Projects a register onto one basis value and renormalizes.
template <typename Real>
Projection<Real> project(const StateVector<Real> &state, std::string_view reg, std::uint64_t outcome) {
    const RegisterLayout &layout = state.layout();
    if (outcome >> layout.width(reg)) {
        throw InputError("outcome outside register range");
    }
    ComplexVector<Real> amps = state.amplitudes();
    Real prob = 0;
    for (std::uint64_t i = 0; i < layout.dimension(); ++i) {
        if (layout.value(i, reg) == outcome) {
            prob += std::norm(amps(i));
        } else {
            amps(i) = 0;
        }
    }
    if (prob < Real(1e-14)) {
        throw ZeroProbabilityError("projection onto register '" + std::string(reg) +
                                   "' = " + std::to_string(outcome) + " has zero probability");
    }
    amps /= std::sqrt(prob);
    return {prob, StateVector<Real>(layout, std::move(amps))};
}

/**
 * <x| rho_reg |x>, where rho_reg is the reduced state of one register and x a
 * normalized vector on it. Equals |<x|psi_reg>|^2 for a product state.
 */
template <typename Real>
Real register_overlap(const StateVector<Real> &state, std::string_view reg,
                      const ComplexVector<Real> &x) {
    const RegisterLayout &layout = state.layout();
    const std::uint64_t dim = std::uint64_t{1} << layout.width(reg);
    if (static_cast<std::uint64_t>(x.size()) != dim) {
        throw InputError("overlap vector does not match register dimension");
    }
    const std::uint64_t reg_mask = (dim - 1) << layout.offset(reg);
    Real total = 0;
    for (std::uint64_t rest = 0; rest < layout.dimension(); ++rest) {
        if (rest & reg_mask) {
            continue;
        }
        std::complex<Real> acc(0);
        for (std::uint64_t i = 0; i < dim; ++i) {
            acc += std::conj(x(i)) * state.amplitude(rest | (i << layout.offset(reg)));
        }
        total += std::norm(acc);
    }
    return total;
}

namespace detail {
// 53 random bits -> [0, 1).
inline double uniform01(std::mt19937_64 &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
} // namespace detail

/// Distinct outcome values of a product observable and their probabilities.
template <typename Real>
std::vector<std::pair<Real, Real>> outcome_distribution(const StateVector<Real> &state,
                                                        const Observable<Real> &obs) {
    detail::check_same_layout(state, obs);
    const RegisterLayout &layout = state.layout();
    ComplexVector<Real> rotated = state.amplitudes();
    std::vector<std::pair<std::string, Vector<Real>>> spectra;
    for (const std::string &reg : obs.active_registers()) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> eig(obs.factor_matrix(reg));
        const std::vector<int> targets = layout.qubits(reg);
        const ComplexMatrix<Real> to_eigenbasis = eig.eigenvectors().adjoint();
        detail::apply_matrix<Real>(rotated, to_eigenbasis, targets, {});
        spectra.emplace_back(reg, eig.eigenvalues());
    }
    std::map<Real, Real> mass;
    for (std::uint64_t i = 0; i < layout.dimension(); ++i) {
        const Real p = std::norm(rotated(i));
        if (p == 0) {
            continue;
        }
        Real value = 1;
        for (const auto &[reg, eigenvalues] : spectra) {
            value *= eigenvalues(static_cast<Eigen::Index>(layout.value(i, reg)));
        }
        // merge values equal up to eigensolver round-off
        value = std::round(value * Real(1e10)) / Real(1e10);
        if (value == 0) {
            value = 0; // fold -0
        }
        mass[value] += p;
    }
    return {mass.begin(), mass.end()};
}

/**
 * Draws `shots` i.i.d. outcomes of measuring a product observable: each
 * active register is measured in its factor's eigenbasis and the outcome is
 * the product of the observed eigenvalues. Deterministic for a given seed.
 */
template <typename Real>
std::vector<Real> sample_observable(const StateVector<Real> &state, const Observable<Real> &obs,
                                    std::int64_t shots, std::uint64_t seed) {
    if (shots < 1) {
        throw InputError("shots must be >= 1");
    }
    const auto dist = outcome_distribution(state, obs);
    std::vector<Real> cdf;
    Real acc = 0;
    for (const auto &[value, p] : dist) {
        acc += p;
        cdf.push_back(acc);
    }
    std::mt19937_64 rng(seed);
    std::vector<Real> out(static_cast<std::size_t>(shots));
    for (auto &o : out) {
        const Real u = static_cast<Real>(detail::uniform01(rng)) * acc;
        std::size_t k = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        k = std::min(k, dist.size() - 1);
        o = dist[k].first;
    }
    return out;
}

} // namespace qgpr
