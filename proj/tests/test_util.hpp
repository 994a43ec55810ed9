#pragma once

// Generators and brute-force oracles shared by the test binaries. Nothing
// here calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "qgpr/kernels.hpp"
#include "qgpr/statevector.hpp"

namespace qgpr::testkit {

using Rng = std::mt19937_64;

inline double normal(Rng &rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline MatrixXd random_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = normal(rng);
        }
    }
    return m;
}

inline VectorXd random_vector(Rng &rng, Eigen::Index n) { return random_matrix(rng, n, 1); }

inline MatrixXd random_orthogonal(Rng &rng, Eigen::Index n) {
    Eigen::HouseholderQR<MatrixXd> qr(random_matrix(rng, n, n));
    return qr.householderQ() * MatrixXd::Identity(n, n);
}

/// Q diag(eigenvalues) Q^T with a random orthogonal Q.
inline MatrixXd spd_with_spectrum(Rng &rng, const VectorXd &eigenvalues) {
    const MatrixXd q = random_orthogonal(rng, eigenvalues.size());
    MatrixXd a = q * eigenvalues.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
}

inline VectorXcd random_state(Rng &rng, Eigen::Index dim) {
    VectorXcd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        v(i) = {normal(rng), normal(rng)};
    }
    return v.normalized();
}

inline MatrixXcd random_unitary(Rng &rng, Eigen::Index n) {
    MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = {normal(rng), normal(rng)};
        }
    }
    Eigen::HouseholderQR<MatrixXcd> qr(m);
    return qr.householderQ() * MatrixXcd::Identity(n, n);
}

inline MatrixXcd kron(const MatrixXcd &a, const MatrixXcd &b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Dense matrix of a product observable, first register as the most
/// significant Kronecker factor.
inline MatrixXcd dense_observable(const Observable<double> &obs) {
    MatrixXcd m = MatrixXcd::Identity(1, 1);
    for (const Register &r : obs.layout().registers()) {
        m = kron(m, obs.factor_matrix(r.name));
    }
    return m;
}

/// Phase-estimation outcome distribution for eigenphase phi (in turns):
/// P(k) = |T^{-1} sum_tau exp(2 pi i tau (phi - k/T))|^2.
inline std::vector<double> qpe_distribution(double phi, int clock_qubits) {
    const int T = 1 << clock_qubits;
    std::vector<double> p(T);
    for (int k = 0; k < T; ++k) {
        std::complex<double> acc = 0;
        for (int tau = 0; tau < T; ++tau) {
            const double angle = 2 * std::numbers::pi * tau * (phi - static_cast<double>(k) / T);
            acc += std::complex<double>(std::cos(angle), std::sin(angle));
        }
        p[k] = std::norm(acc / static_cast<double>(T));
    }
    return p;
}

/// Eigenvalue grid 2 pi k / (t0 T) for integer k; with t0 = 2 pi / T this is k itself.
inline double exact_phase_t0(int clock_qubits) { return 2 * std::numbers::pi / (1 << clock_qubits); }

/// Random SPD matrix whose eigenvalues are integers in [kmin, kmax], so that
/// every phase is exactly representable with t0 = exact_phase_t0(clock).
inline MatrixXd exact_phase_system(Rng &rng, Eigen::Index n, int kmin, int kmax,
                                   VectorXd *spectrum = nullptr) {
    VectorXd ev(n);
    std::uniform_int_distribution<int> pick(kmin, kmax);
    for (Eigen::Index i = 0; i < n; ++i) {
        ev(i) = pick(rng);
    }
    ev(0) = kmin; // pin the minimum so c = kmin is tight
    if (spectrum) {
        *spectrum = ev;
    }
    return spd_with_spectrum(rng, ev);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double stddev(const std::vector<double> &v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline TrainingSet<double> random_training(Rng &rng, Eigen::Index n, Eigen::Index d, double spread = 2.0) {
    MatrixXd pts(n, d);
    VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            pts(i, j) = uniform(rng, -spread, spread);
        }
        y(i) = std::sin(pts.row(i).sum()) + 0.1 * normal(rng);
    }
    return TrainingSet<double>(pts, y);
}

/// Points on a line with unit spacing; with cutoff in (1, 2) the
/// compact-support Gram matrix is tridiagonal.
inline TrainingSet<double> banded_training(Rng &rng, Eigen::Index n) {
    MatrixXd pts(n, 1);
    VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        pts(i, 0) = static_cast<double>(i);
        y(i) = normal(rng);
    }
    return TrainingSet<double>(pts, y);
}

} // namespace qgpr::testkit
