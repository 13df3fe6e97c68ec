#include "sgtr/servo.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace sgtr {

namespace {
constexpr std::complex<double> kJ{0.0, 1.0};
}

std::vector<std::complex<double>> Exosystem::roots_upper() const {
    std::vector<std::complex<double>> roots;
    roots.reserve(frequencies.size() + 1);
    roots.emplace_back(0.0, 0.0);
    for (double w : frequencies) roots.emplace_back(0.0, w);
    return roots;
}

std::vector<std::complex<double>> Exosystem::roots_all() const {
    std::vector<std::complex<double>> roots;
    roots.reserve(2 * frequencies.size() + 1);
    roots.emplace_back(0.0, 0.0);
    for (double w : frequencies) {
        roots.emplace_back(0.0, w);
        roots.emplace_back(0.0, -w);
    }
    return roots;
}

Exosystem build_exosystem(const std::vector<double>& frequencies) {
    double prev = 0.0;
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        const double w = frequencies[i];
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ConfigError("exosystem frequency " + std::to_string(w) +
                              " is not strictly positive");
        }
        // Strict ordering with a relative gap, measured against the previous
        // entry (zero for the first, so near-zero frequencies are rejected).
        if (w - prev <= 1e-9 * std::max(1.0, w)) {
            throw ConfigError("exosystem frequencies must be strictly "
                              "increasing with relative gap > 1e-9 (offender: " +
                              std::to_string(w) + ")");
        }
        prev = w;
    }
    return Exosystem{frequencies};
}

ServoCompensator build_servocompensator(const Exosystem& exo, int r) {
    if (r < 1) throw ConfigError("servocompensator error dimension r must be >= 1");
    const int q = exo.q();
    const int ell = exo.ell();

    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(q);
    g(0) = 1.0;
    for (int k = 0; k < ell; ++k) {
        const int at = 1 + 2 * k;
        const double w = exo.frequencies[static_cast<std::size_t>(k)];
        phi(at, at + 1) = 1.0;
        phi(at + 1, at) = -w * w;
        g(at + 1) = 1.0;
    }

    ServoCompensator servo;
    servo.phi = phi;
    servo.g = g;
    servo.r = r;
    const Eigen::MatrixXd Ir = Eigen::MatrixXd::Identity(r, r);
    servo.Phi = Eigen::kroneckerProduct(phi, Ir);
    servo.G = Eigen::kroneckerProduct(g, Ir);
    return servo;
}

SpectralData spectral_projectors(const Exosystem& exo) {
    const int q = exo.q();
    const int ell = exo.ell();

    SpectralData sd;
    sd.lambda = exo.roots_upper();
    sd.V = Eigen::MatrixXcd::Zero(q, ell + 1);
    sd.W = Eigen::MatrixXcd::Zero(ell + 1, q);
    sd.X.reserve(static_cast<std::size_t>(ell) + 1);

    // Constant block: scalar eigenvalue zero, v = w = e_1.
    sd.V(0, 0) = 1.0;
    sd.W(0, 0) = 1.0;

    // Harmonic block k: v = (1, jw)^T, w = (1/2, -j/(2w)) within the block.
    for (int k = 1; k <= ell; ++k) {
        const int at = 1 + 2 * (k - 1);
        const double w = exo.frequencies[static_cast<std::size_t>(k - 1)];
        sd.V(at, k) = 1.0;
        sd.V(at + 1, k) = kJ * w;
        sd.W(k, at) = 0.5;
        sd.W(k, at + 1) = -kJ / (2.0 * w);
    }

    for (int k = 0; k <= ell; ++k) {
        sd.X.push_back(sd.V.col(k) * sd.W.row(k));
    }
    return sd;
}

Eigen::MatrixXcd SpectralData::lifted(int k, int r) const {
    const Eigen::MatrixXcd Ir = Eigen::MatrixXcd::Identity(r, r);
    return Eigen::kroneckerProduct(X[static_cast<std::size_t>(k)], Ir);
}

} // namespace sgtr
