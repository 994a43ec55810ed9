#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qgpr/classical_gpr.hpp"
#include "qgpr/qla.hpp"
#include "test_util.hpp"

using namespace qgpr;
using qgpr::testkit::Rng;
using cd = std::complex<double>;

namespace {
constexpr double kPi = std::numbers::pi;

QlaConfig<double> config(int clock, double t0, double c) {
    QlaConfig<double> cfg;
    cfg.clock_qubits = clock;
    cfg.t0 = t0;
    cfg.c = c;
    return cfg;
}

VectorXd vec(std::initializer_list<double> xs) {
    VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

MatrixXd diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }
} // namespace

TEST(QlaConfig, AutomaticAvoidsWraparound) {
    Rng rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd a = testkit::spd_with_spectrum(rng, VectorXd::LinSpaced(4, 0.3, 5.0));
        const auto cfg = QlaConfig<double>::automatic(a, 6, 0.3);
        EXPECT_NO_THROW(cfg.validate_against(a));
        EXPECT_LT(cfg.t0 * 5.0, 2 * kPi);
    }
}

TEST(QlaConfig, RejectsWraparoundAndLargeC) {
    EXPECT_THROW(config(4, 2 * kPi, 0.5).validate_against(diag({0.5, 1.0})), ConfigError);
    EXPECT_THROW(config(4, 1.0, 0.6).validate_against(diag({0.5, 1.0})), ConfigError);
    EXPECT_THROW(config(4, 1.0, 0.1).validate_against(diag({-0.5, 1.0})), ConditioningError);
    EXPECT_THROW(config(0, 1.0, 0.1).validate(), InputError);
}

TEST(MakeEncoding, Examples) {
    const auto e = make_encoding<double>(vec({0, 3, 0, 4}));
    EXPECT_EQ(e.support, (std::vector<Eigen::Index>{1, 3}));
    EXPECT_EQ(e.sparsity(), 2);
    EXPECT_DOUBLE_EQ(e.scale, 0.25);
    const auto one = make_encoding<double>(vec({1}));
    EXPECT_EQ(one.sparsity(), 1);
    EXPECT_DOUBLE_EQ(one.scale, 1.0);
    EXPECT_THROW(make_encoding<double>(VectorXd::Zero(3)), InputError);
}

TEST(MakeEncoding, ScaleSaturatesLargestEntry) {
    Rng rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        const VectorXd v = testkit::random_vector(rng, 8);
        const auto e = make_encoding(v);
        EXPECT_DOUBLE_EQ(e.scale * v.cwiseAbs().maxCoeff(), 1.0);
        EXPECT_TRUE(e.dense() == v);
    }
}

TEST(PrepareSparseState, BasisVector) {
    const RegisterLayout l({{"B", 1}, {"C", 1}});
    const auto s = prepare_sparse_state(l, "B", "C", make_encoding<double>(vec({1, 0})));
    EXPECT_NEAR(std::abs(s.amplitude(l.compose(std::vector<std::uint64_t>{0, 1}))), 1.0, 1e-15);
    EXPECT_NEAR(project(s, "C", 1).probability, 1.0, 1e-15);
}

TEST(PrepareSparseState, UniformVector) {
    const RegisterLayout l({{"B", 1}, {"C", 1}});
    const auto s = prepare_sparse_state(l, "B", "C", make_encoding<double>(vec({1, 1})));
    for (std::uint64_t i : {0u, 1u}) {
        EXPECT_NEAR(s.amplitude(l.compose(std::vector<std::uint64_t>{i, 1})).real(), 1 / std::sqrt(2.0), 1e-15);
    }
    EXPECT_NEAR(project(s, "C", 1).probability, 1.0, 1e-14);
}

TEST(PrepareSparseState, PostSelectionRecoversNormalizedVector) {
    const RegisterLayout l({{"B", 1}, {"C", 1}});
    for (double scale : {0.01, 1.0, 37.0, -2.5}) {
        const auto s = prepare_sparse_state(l, "B", "C", make_encoding<double>(scale * vec({3, 4})));
        const auto post = project(s, "C", 1);
        const double sign = scale > 0 ? 1.0 : -1.0;
        EXPECT_NEAR(post.state.amplitude(l.compose(std::vector<std::uint64_t>{0, 1})).real(), sign * 0.6, 1e-12);
        EXPECT_NEAR(post.state.amplitude(l.compose(std::vector<std::uint64_t>{1, 1})).real(), sign * 0.8, 1e-12);
    }
}

TEST(PrepareSparseState, FlagProbabilityLaw) {
    Rng rng(53);
    const RegisterLayout l({{"B", 3}, {"C", 1}});
    for (int trial = 0; trial < 50; ++trial) {
        VectorXd v = testkit::random_vector(rng, 7);
        for (Eigen::Index i = 0; i < 7; ++i) {
            if (testkit::uniform(rng, 0, 1) < 0.4) v(i) = 0;
        }
        v(trial % 7) = 1.0 + trial;
        const auto e = make_encoding(v);
        const auto s = prepare_sparse_state(l, "B", "C", e);
        const double expected = e.scale * e.scale * v.squaredNorm() / static_cast<double>(e.sparsity());
        EXPECT_NEAR(project(s, "C", 1).probability, expected, 1e-10);
    }
}

TEST(PrepareSparseState, IndexRegisterTooNarrow) {
    const RegisterLayout l({{"B", 1}, {"C", 1}});
    EXPECT_THROW(prepare_sparse_state(l, "B", "C", make_encoding<double>(vec({1, 2, 3}))), InputError);
}

TEST(PhaseEstimate, ExactHalfTurnLandsOnMiddleBin) {
    const double t0 = 1.3;
    const int clock = 3;
    const MatrixXd a = diag({kPi / t0, 2 * kPi * 0.25 / t0}); // phases 0.5 and 0.25
    const RegisterLayout l({{"B", 1}, {"E", clock}});
    auto s = init_basis<double>(l, {0, 0});
    phase_estimate(s, "E", "B", a, config(clock, t0, 0.1));
    EXPECT_NEAR(outcome_probabilities(s, "E")[4], 1.0, 1e-12);
    auto t = init_basis<double>(l, {1, 0});
    phase_estimate(t, "E", "B", a, config(clock, t0, 0.1));
    EXPECT_NEAR(outcome_probabilities(t, "E")[2], 1.0, 1e-12);
}

TEST(PhaseEstimate, EigenstateDistributionMatchesBruteForce) {
    Rng rng(54);
    const int clock = 5;
    const MatrixXd a = testkit::spd_with_spectrum(rng, vec({0.37, 0.81, 1.23, 1.9}));
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
    const auto cfg = QlaConfig<double>::automatic(a, clock, 0.3);
    const RegisterLayout l({{"B", 2}, {"E", clock}});
    for (Eigen::Index j = 0; j < 4; ++j) {
        auto s = init_basis<double>(l, {0, 0});
        apply_register_gate(s, "B", gates::state_preparation<double>(eig.eigenvectors().col(j).cast<cd>()));
        phase_estimate(s, "E", "B", a, cfg);
        EXPECT_NEAR(s.norm(), 1.0, 1e-10);
        const auto got = outcome_probabilities(s, "E");
        const double phi = eig.eigenvalues()(j) * cfg.t0 / (2 * kPi);
        const auto ref = testkit::qpe_distribution(phi, clock);
        for (int k = 0; k < (1 << clock); ++k) {
            EXPECT_NEAR(got[k], ref[k], 1e-10);
        }
        const auto peak = static_cast<std::size_t>(std::lround(phi * (1 << clock))) % (1u << clock);
        EXPECT_GE(got[peak], 4 / (kPi * kPi));
    }
}

TEST(PhaseEstimate, WraparoundIsConfigError) {
    const RegisterLayout l({{"B", 1}, {"E", 3}});
    auto s = init_basis<double>(l, {0, 0});
    EXPECT_THROW(phase_estimate(s, "E", "B", diag({1, 2}), config(3, 4.0, 1.0)), ConfigError);
    EXPECT_THROW(qla_solve<double>(vec({1, 0}), diag({1, 2}), config(3, 4.0, 1.0)), ConfigError);
}

TEST(EigenvalueInversion, BranchRotations) {
    const int clock = 3;
    const auto cfg = config(clock, 2 * kPi / 8, 1.0); // clock value k decodes to lambda = k
    const RegisterLayout l({{"D", 1}, {"E", clock}});
    {
        auto s = init_basis<double>(l, {0, 1}); // lambda~ = 1 = c
        eigenvalue_inversion(s, "E", "D", cfg);
        EXPECT_NEAR(std::abs(s.amplitude(l.compose(std::vector<std::uint64_t>{1, 1}))), 1.0, 1e-15);
    }
    {
        auto s = init_basis<double>(l, {0, 2}); // lambda~ = 2c
        eigenvalue_inversion(s, "E", "D", cfg);
        EXPECT_NEAR(s.amplitude(l.compose(std::vector<std::uint64_t>{0, 2})).real(), std::sqrt(3.0) / 2, 1e-15);
        EXPECT_NEAR(s.amplitude(l.compose(std::vector<std::uint64_t>{1, 2})).real(), 0.5, 1e-15);
    }
}

TEST(EigenvalueInversion, SuperposedClockTermwise) {
    const int clock = 3;
    const auto cfg = config(clock, 2 * kPi / 8 / 0.5, 0.5); // k decodes to 0.5 k
    const RegisterLayout l({{"D", 1}, {"E", clock}});
    auto s = init_basis<double>(l, {0, 0});
    hadamard_all(s, "E");
    const auto stats = eigenvalue_inversion(s, "E", "D", cfg);
    EXPECT_EQ(stats.clamped_branches, 0);
    const double a = 1 / std::sqrt(8.0);
    EXPECT_NEAR(s.amplitude(l.compose(std::vector<std::uint64_t>{0, 0})).real(), a, 1e-15); // k = 0 untouched
    for (std::uint64_t k = 1; k < 8; ++k) {
        const double ratio = 0.5 / (0.5 * static_cast<double>(k));
        EXPECT_NEAR(s.amplitude(l.compose(std::vector<std::uint64_t>{1, k})).real(), a * ratio, 1e-14);
        EXPECT_NEAR(s.amplitude(l.compose(std::vector<std::uint64_t>{0, k})).real(), a * std::sqrt(1 - ratio * ratio), 1e-14);
    }
}

TEST(EigenvalueInversion, ClampsBelowC) {
    const auto cfg = config(3, 2 * kPi / 8, 2.5); // k = 1, 2 decode below c
    const RegisterLayout l({{"D", 1}, {"E", 3}});
    auto s = init_basis<double>(l, {0, 1});
    const auto stats = eigenvalue_inversion(s, "E", "D", cfg);
    EXPECT_EQ(stats.clamped_branches, 2);
    EXPECT_NEAR(stats.clamped_probability, 1.0, 1e-14);
    EXPECT_NEAR(s.norm(), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(s.amplitude(l.compose(std::vector<std::uint64_t>{1, 1}))), 1.0, 1e-15);
}

TEST(QlaSolve, IdentitySystem) {
    const int clock = 2;
    const auto r = qla_solve<double>(vec({1, 0}), MatrixXd::Identity(2, 2),
                                     config(clock, testkit::exact_phase_t0(clock), 1.0));
    EXPECT_NEAR(r.success_probability, 1.0, 1e-12);
    EXPECT_NEAR(solution_fidelity(r, vec({1, 0})), 1.0, 1e-12);
    EXPECT_LE(r.clock_residual, 1e-12);
}

TEST(QlaSolve, DiagonalSystemWithExactPhases) {
    const int clock = 3;
    const double t0 = 2 * kPi / (8 * 0.5); // 0.5 -> k = 1, 1 -> k = 2
    const VectorXd b = vec({1, 1}) / std::sqrt(2.0);
    const MatrixXd a = diag({0.5, 1.0});
    const auto r = qla_solve<double>(b, a, config(clock, t0, 0.5));
    const VectorXd x = dense_inverse(a) * b;
    EXPECT_NEAR(solution_fidelity(r, vec({2, 1})), 1.0, 1e-10);
    EXPECT_NEAR(r.success_probability, (0.5 * x).squaredNorm(), 1e-12);
    // amplitude-level check of the post-selected index register
    const auto &l = r.state.layout();
    const cd a0 = r.state.amplitude(l.compose(std::vector<std::uint64_t>{0, 1, 0}));
    const cd a1 = r.state.amplitude(l.compose(std::vector<std::uint64_t>{1, 1, 0}));
    EXPECT_NEAR(std::abs(a0), 2 / std::sqrt(5.0), 1e-10);
    EXPECT_NEAR(std::abs(a1), 1 / std::sqrt(5.0), 1e-10);
}

TEST(QlaSolve, ExactPhasesRandomRotatedSystems) {
    Rng rng(55);
    for (Eigen::Index n : {2, 3, 4, 8}) {
        for (int trial = 0; trial < 5; ++trial) {
            const int clock = 4;
            VectorXd spectrum;
            const MatrixXd a = testkit::exact_phase_system(rng, n, 2, 15, &spectrum);
            const VectorXd b = testkit::random_vector(rng, n);
            const double c = spectrum.minCoeff();
            const auto r = qla_solve(b, a, config(clock, testkit::exact_phase_t0(clock), c));
            const VectorXd x = dense_inverse(a) * b;
            EXPECT_GE(solution_fidelity(r, x), 1 - 1e-8) << "n=" << n;
            EXPECT_NEAR(r.success_probability, (c * x / b.norm()).squaredNorm(), 1e-8);
            EXPECT_LE(r.clock_residual, 1e-6);
        }
    }
}

TEST(QlaSolve, GenericSpectrumFidelity) {
    Rng rng(56);
    std::vector<double> fid;
    for (int trial = 0; trial < 10; ++trial) {
        VectorXd ev(4);
        for (Eigen::Index i = 0; i < 4; ++i) ev(i) = testkit::uniform(rng, 0.25, 1.0);
        const MatrixXd a = testkit::spd_with_spectrum(rng, ev);
        const VectorXd b = testkit::random_vector(rng, 4);
        const auto r = qla_solve(b, a, QlaConfig<double>::automatic(a, 8, 0.25));
        fid.push_back(solution_fidelity(r, VectorXd(dense_inverse(a) * b)));
    }
    EXPECT_GE(testkit::median(fid), 0.99);
}

TEST(QlaSolve, AccuracyImprovesWithClockWidth) {
    Rng rng(57);
    std::vector<MatrixXd> systems;
    std::vector<VectorXd> rhs;
    for (int trial = 0; trial < 8; ++trial) {
        VectorXd ev(4);
        for (Eigen::Index i = 0; i < 4; ++i) ev(i) = testkit::uniform(rng, 0.25, 1.0);
        systems.push_back(testkit::spd_with_spectrum(rng, ev));
        rhs.push_back(testkit::random_vector(rng, 4));
    }
    double previous = 1.0;
    for (int clock : {4, 6, 8}) {
        std::vector<double> infid;
        for (std::size_t i = 0; i < systems.size(); ++i) {
            const auto r = qla_solve(rhs[i], systems[i], QlaConfig<double>::automatic(systems[i], clock, 0.25));
            infid.push_back(1 - solution_fidelity(r, VectorXd(dense_inverse(systems[i]) * rhs[i])));
        }
        const double med = testkit::median(infid);
        EXPECT_LE(med, previous) << "clock " << clock;
        previous = med;
    }
}

TEST(QlaSolve, RejectsZeroRhsAndShapeMismatch) {
    EXPECT_THROW(qla_solve<double>(VectorXd::Zero(2), MatrixXd::Identity(2, 2), config(2, 1, 1)), InputError);
    EXPECT_THROW(qla_solve<double>(VectorXd::Ones(3), MatrixXd::Identity(2, 2), config(2, 1, 1)), InputError);
}

TEST(Hermitianize, Examples) {
    MatrixXd one(1, 1);
    one << 1;
    MatrixXd expect(2, 2);
    expect << 0, 1, 1, 0;
    EXPECT_TRUE(hermitianize(one) == expect);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hermitianize(MatrixXd(2.0 * MatrixXd::Identity(2, 2))));
    EXPECT_TRUE(eig.eigenvalues().isApprox(vec({-2, -2, 2, 2}), 1e-14));
}

TEST(Hermitianize, SpectrumIsPlusMinusSingularValues) {
    Rng rng(58);
    for (auto [m, n] : {std::pair{3, 3}, std::pair{2, 4}, std::pair{5, 2}}) {
        const MatrixXd a = testkit::random_matrix(rng, m, n);
        const MatrixXd h = hermitianize(a);
        EXPECT_TRUE(is_hermitian(h, 0.0));
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h);
        Eigen::JacobiSVD<MatrixXd> svd(a);
        std::vector<double> expect(static_cast<std::size_t>(m + n), 0.0);
        const auto k = svd.singularValues().size();
        for (Eigen::Index i = 0; i < k; ++i) {
            expect[static_cast<std::size_t>(i)] = svd.singularValues()(i);
            expect[static_cast<std::size_t>(k + i)] = -svd.singularValues()(i);
        }
        std::sort(expect.begin(), expect.end());
        for (Eigen::Index i = 0; i < m + n; ++i) {
            EXPECT_NEAR(eig.eigenvalues()(i), expect[static_cast<std::size_t>(i)], 1e-10);
        }
    }
}
