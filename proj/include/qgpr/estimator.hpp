#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgpr/classical_gpr.hpp"
#include "qgpr/errors.hpp"
#include "qgpr/kernels.hpp"
#include "qgpr/linalg.hpp"
#include "qgpr/qla.hpp"
#include "qgpr/statevector.hpp"

namespace qgpr {

enum class EstimationMode { Exact, Sampled };

inline std::string_view to_string(EstimationMode m) {
    return m == EstimationMode::Exact ? "exact" : "sampled";
}

inline EstimationMode estimation_mode_from(std::string_view name) {
    if (name == "exact") {
        return EstimationMode::Exact;
    }
    if (name == "sampled") {
        return EstimationMode::Sampled;
    }
    throw InputError("mode must be 'exact' or 'sampled', got '" + std::string(name) + "'");
}

template <typename Real> struct EstimationResult {
    Real estimate = 0;
    Real std_error = 0;
    std::int64_t shots = 0;
    /// Estimate of <M> before rescaling.
    Real raw_mean = 0;
    /// Fraction of shots (or probability, in exact mode) with C = 1 and D = 1.
    Real success_fraction = 0;
    /// Factor mapping raw_mean to the bilinear form u^T A^{-1} v.
    Real scale = 0;
    QlaConfig<Real> config;
    std::uint64_t seed = 0;
    EstimationMode mode = EstimationMode::Exact;
    std::vector<std::string> warnings;
};

/// Inputs for estimating u^T A^{-1} v.
template <typename Real> struct BilinearSpec {
    SparseEncoding<Real> u;
    SparseEncoding<Real> v;
    Matrix<Real> system;
    QlaConfig<Real> config;

    void validate() const {
        if (system.rows() != system.cols()) {
            throw InputError("bilinear system must be square");
        }
        if (u.length != system.rows() || v.length != system.rows()) {
            throw InputError("bilinear vectors must match the system dimension");
        }
    }

    /// raw <M> times this gives u^T A^{-1} v.
    [[nodiscard]] Real rescale() const {
        return std::sqrt(static_cast<Real>(u.sparsity()) * static_cast<Real>(v.sparsity())) /
               (config.c * u.scale * v.scale);
    }
};

template <typename Real> struct InterferenceState {
    StateVector<Real> state;
    InversionStats inversion;
};

/**
 * Five-register interference circuit (A branch, B index, C flag, D ancilla,
 * E clock):
 *   A <- |+>;
 *   A=0: prepare u~ on (B, C), then X on D;
 *   A=1: prepare v~ on (B, C);
 *   A=1, C=1: phase estimation on B with clock E, inversion onto D, uncompute.
 * The system is padded with c * I to the index-register dimension.
 */
template <typename Real>
InterferenceState<Real> build_interference_state(const BilinearSpec<Real> &spec) {
    spec.validate();
    const QlaConfig<Real> &cfg = spec.config;
    const Matrix<Real> padded = pad_system(spec.system, cfg.c);
    cfg.validate_against(padded);
    const int w = register_width_for(spec.system.rows());
    const RegisterLayout layout({{std::string(reg::kBranch), 1},
                                 {std::string(reg::kIndex), w},
                                 {std::string(reg::kFlag), 1},
                                 {std::string(reg::kAncilla), 1},
                                 {std::string(reg::kClock), cfg.clock_qubits}});
    StateVector<Real> state = init_basis<Real>(layout, {0, 0, 0, 0, 0});
    hadamard_all(state, reg::kBranch);

    const auto on_u = register_equals(layout, reg::kBranch, 0);
    const auto on_v = register_equals(layout, reg::kBranch, 1);
    prepare_sparse_state(state, reg::kIndex, reg::kFlag, spec.u, on_u);
    const int d_qubit[] = {layout.qubit(reg::kAncilla, 0)};
    detail::apply_matrix(state.mutable_amplitudes(), gates::pauli_x<Real>(), d_qubit, on_u);
    prepare_sparse_state(state, reg::kIndex, reg::kFlag, spec.v, on_v);

    const auto solve = on_v + register_equals(layout, reg::kFlag, 1);
    phase_estimate(state, reg::kClock, reg::kIndex, padded, cfg, solve);
    const InversionStats inv = eigenvalue_inversion(state, reg::kClock, reg::kAncilla, cfg, solve);
    unphase_estimate(state, reg::kClock, reg::kIndex, padded, cfg, solve);
    return {std::move(state), inv};
}

/// X on A, identity on B and E, |1><1| on C and D.
template <typename Real> Observable<Real> observable_M(const RegisterLayout &layout) {
    for (auto name : {reg::kBranch, reg::kIndex, reg::kFlag, reg::kAncilla}) {
        if (!layout.contains(name)) {
            throw InputError("observable M needs register '" + std::string(name) + "'");
        }
    }
    Observable<Real> m(layout);
    m.set(reg::kBranch, FactorKind::PauliX)
        .set(reg::kFlag, FactorKind::ProjectOne)
        .set(reg::kAncilla, FactorKind::ProjectOne);
    return m;
}

namespace detail {
inline constexpr double kClampWarnThreshold = 1e-3;

template <typename Real> Real flag_success_probability(const StateVector<Real> &state) {
    const RegisterLayout &layout = state.layout();
    Real p = 0;
    for (std::uint64_t i = 0; i < layout.dimension(); ++i) {
        if (layout.value(i, reg::kFlag) == 1 && layout.value(i, reg::kAncilla) == 1) {
            p += std::norm(state.amplitude(i));
        }
    }
    return p;
}

template <typename Real>
void note_inversion(EstimationResult<Real> &r, const InversionStats &inv) {
    if (inv.clamped_probability > kClampWarnThreshold) {
        r.warnings.push_back("inversion rotation clamped on " + std::to_string(inv.clamped_branches) +
                             " clock values below c holding probability " +
                             std::to_string(inv.clamped_probability));
    }
}
} // namespace detail

/**
 * Estimates u^T A^{-1} v from <M> = c c_u c_v (s_u s_v)^{-1/2} u^T A^{-1} v.
 *
 * Exact mode reads <M> from the amplitudes (std_error 0, shots 0). Sampled
 * mode averages `shots` draws of the {-1, 0, +1} outcome of M.
 */
template <typename Real>
EstimationResult<Real> estimate_bilinear(const BilinearSpec<Real> &spec, std::int64_t shots,
                                         std::uint64_t seed, EstimationMode mode) {
    if (mode == EstimationMode::Sampled && shots < 1) {
        throw InputError("sampled mode needs shots >= 1");
    }
    const InterferenceState<Real> built = build_interference_state(spec);
    const Observable<Real> m = observable_M<Real>(built.state.layout());

    EstimationResult<Real> r;
    r.config = spec.config;
    r.seed = seed;
    r.mode = mode;
    r.scale = spec.rescale();
    detail::note_inversion(r, built.inversion);
    if (mode == EstimationMode::Exact) {
        r.raw_mean = expectation(built.state, m);
        r.success_fraction = detail::flag_success_probability(built.state);
        r.shots = 0;
        r.std_error = 0;
    } else {
        const std::vector<Real> outcomes = sample_observable(built.state, m, shots, seed);
        Real sum = 0, sum_sq = 0;
        std::int64_t hits = 0;
        for (Real o : outcomes) {
            sum += o;
            sum_sq += o * o;
            hits += o != 0 ? 1 : 0;
        }
        const auto n = static_cast<Real>(shots);
        r.raw_mean = sum / n;
        const Real var = shots > 1 ? std::max(Real(0), (sum_sq - n * r.raw_mean * r.raw_mean) / (n - 1))
                                   : Real(0);
        r.std_error = std::sqrt(var / n) * r.scale;
        r.success_fraction = static_cast<Real>(hits) / n;
        r.shots = shots;
    }
    r.estimate = r.raw_mean * r.scale;
    return r;
}

/// Quantum settings for the GPR estimators; c is always the noise variance.
struct GprQlaOptions {
    int clock_qubits = 8;
    /// Evolution time; Gershgorin-based default when unset.
    std::optional<double> t0;
};

template <typename Real>
QlaConfig<Real> gpr_config(const GPModel<Real> &model, const GprQlaOptions &opts) {
    const Real c = model.noise_variance;
    QlaConfig<Real> cfg = QlaConfig<Real>::automatic(pad_system(model.system, c), opts.clock_qubits, c);
    if (opts.t0) {
        cfg.t0 = static_cast<Real>(*opts.t0);
    }
    return cfg;
}

namespace detail {
template <typename Real>
EstimationResult<Real> degenerate_result(Real value, const QlaConfig<Real> &cfg, std::uint64_t seed,
                                         EstimationMode mode, std::string why) {
    EstimationResult<Real> r;
    r.estimate = value;
    r.config = cfg;
    r.seed = seed;
    r.mode = mode;
    r.warnings.push_back(std::move(why));
    return r;
}
} // namespace detail

/// Linear predictor: k_*^T (K + s2 I)^{-1} y = sqrt(s_k s_y) / (s2 c_k c_y) <M>.
template <typename Real, typename Derived>
EstimationResult<Real> predict_mean_quantum(const GPModel<Real> &model,
                                            const Eigen::MatrixBase<Derived> &x_star,
                                            const GprQlaOptions &opts, std::int64_t shots,
                                            std::uint64_t seed, EstimationMode mode) {
    const Vector<Real> k_star = build_cross(model, x_star);
    const QlaConfig<Real> cfg = gpr_config(model, opts);
    if ((k_star.array() == 0).all()) {
        return detail::degenerate_result(Real(0), cfg, seed, mode,
                                         "k_* is zero; predictor is 0 without running the circuit");
    }
    if ((model.targets().array() == 0).all()) {
        return detail::degenerate_result(Real(0), cfg, seed, mode,
                                         "y is zero; predictor is 0 without running the circuit");
    }
    BilinearSpec<Real> spec{make_encoding(k_star), make_encoding(model.targets()), model.system, cfg};
    return estimate_bilinear(spec, shots, seed, mode);
}

/// Predictive variance: k(x_*, x_*) - s_k / (s2 c_k^2) <M> with u = v = k_*.
template <typename Real, typename Derived>
EstimationResult<Real> predict_variance_quantum(const GPModel<Real> &model,
                                                const Eigen::MatrixBase<Derived> &x_star,
                                                const GprQlaOptions &opts, std::int64_t shots,
                                                std::uint64_t seed, EstimationMode mode) {
    const Vector<Real> k_star = build_cross(model, x_star);
    const Real prior = prior_variance(model, x_star);
    const QlaConfig<Real> cfg = gpr_config(model, opts);
    if ((k_star.array() == 0).all()) {
        return detail::degenerate_result(prior, cfg, seed, mode,
                                         "k_* is zero; variance equals the prior variance");
    }
    const SparseEncoding<Real> enc = make_encoding(k_star);
    BilinearSpec<Real> spec{enc, enc, model.system, cfg};
    EstimationResult<Real> r = estimate_bilinear(spec, shots, seed, mode);
    r.estimate = prior - r.estimate;
    if (r.estimate < 0) {
        r.warnings.push_back("variance estimate " + std::to_string(r.estimate) + " clamped to 0");
        r.estimate = 0;
    }
    return r;
}

/// Shots N with (rescaled per-shot variance) / N <= delta^2.
template <typename Real>
std::int64_t shots_for_precision(Real delta, const EstimationResult<Real> &pilot) {
    if (!(delta > 0)) {
        throw InputError("precision target must be positive");
    }
    if (pilot.shots < 100) {
        throw InputError("pilot run needs at least 100 shots");
    }
    const Real per_shot_sd = pilot.std_error * std::sqrt(static_cast<Real>(pilot.shots));
    const Real n = per_shot_sd * per_shot_sd / (delta * delta);
    // absorb round-off so that exact ratios are not bumped up by one
    const auto shots = static_cast<std::int64_t>(std::ceil(n * (Real(1) - Real(1e-12))));
    return std::max<std::int64_t>(shots, 1);
}

template <typename Real> struct Sparsified {
    Vector<Real> y_prime;
    /// Row vector k_*^T T_x, stored as a column.
    Vector<Real> weights;
    std::vector<Eigen::Index> support;
};

/**
 * Drops entries of y that the truncated Neumann series
 *   T_x = sum_{j<x} (-1)^j K^j / s2^{j+1}  ~  (K + s2 I)^{-1}
 * cannot reach from k_*, so that k_*^T T_x y' == k_*^T T_x y. Requires the
 * spectral radius of K / s2 to be below 1.
 */
template <typename Real, typename Derived>
Sparsified<Real> sparsify_y(const GPModel<Real> &model, const Eigen::MatrixBase<Derived> &x_star,
                            int order) {
    if (order < 1) {
        throw InputError("expansion order must be >= 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix<Real>> eig(model.gram, Eigen::EigenvaluesOnly);
    const Real rho = eig.eigenvalues().cwiseAbs().maxCoeff() / model.noise_variance;
    if (!(rho < Real(1))) {
        throw ExpansionError("Neumann expansion diverges (spectral radius of K/noise = " +
                             std::to_string(rho) + "); use the dense y instead");
    }
    const Vector<Real> k_star = build_cross(model, x_star);
    Vector<Real> term = k_star / model.noise_variance;
    Vector<Real> weights = term;
    for (int j = 1; j < order; ++j) {
        term = -(model.gram * term) / model.noise_variance;
        weights += term;
    }
    Sparsified<Real> out;
    out.y_prime = Vector<Real>::Zero(model.size());
    for (Eigen::Index i = 0; i < model.size(); ++i) {
        if (weights(i) != 0) {
            out.y_prime(i) = model.targets()(i);
            out.support.push_back(i);
        }
    }
    out.weights = std::move(weights);
    return out;
}

} // namespace qgpr
