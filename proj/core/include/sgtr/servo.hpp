#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "sgtr/errors.hpp"

namespace sgtr {

/// Signal class generated by the disturbance/reference model: a constant mode
/// plus one harmonic per listed frequency. The minimal polynomial is
/// s (s^2 + w_1^2) ... (s^2 + w_l^2), of order q = 2l + 1, with roots at zero
/// and at +/- j w_k.
struct Exosystem {
    std::vector<double> frequencies; // strictly increasing, strictly positive

    int ell() const { return static_cast<int>(frequencies.size()); }
    int q() const { return 2 * ell() + 1; }

    /// Roots with nonnegative imaginary part: {0, j w_1, ..., j w_l}.
    std::vector<std::complex<double>> roots_upper() const;
    /// Full root multiset {0, +/- j w_k}.
    std::vector<std::complex<double>> roots_all() const;
};

/// Validates ordering/positivity and builds the exosystem description.
/// An empty frequency list describes the constant-only case (q = 1).
Exosystem build_exosystem(const std::vector<double>& frequencies);

/// Error-driven internal model  d/dt eta = Phi eta + G e  with
/// phi = blkdiag(0, [[0,1],[-w_k^2,0]], ...), g = col(1, (0,1), ...) and the
/// lifted pair Phi = phi (x) I_r, G = g (x) I_r.
struct ServoCompensator {
    Eigen::MatrixXd phi; // q x q
    Eigen::VectorXd g;   // q
    int r = 0;           // error dimension
    Eigen::MatrixXd Phi; // rq x rq
    Eigen::MatrixXd G;   // rq x r

    int q() const { return static_cast<int>(phi.rows()); }
    int rq() const { return r * q(); }
};

ServoCompensator build_servocompensator(const Exosystem& exo, int r);

/// Closed-form eigenstructure of phi: simple eigenvalues (upper-half-plane
/// representatives), biorthogonal left/right eigenvectors, and the rank-one
/// spectral projectors X_k = v_k w_k. Conjugate data is derived on demand.
struct SpectralData {
    std::vector<std::complex<double>> lambda; // size ell+1; lambda[0] = 0
    Eigen::MatrixXcd V;                       // q x (ell+1), columns v_k
    Eigen::MatrixXcd W;                       // (ell+1) x q, rows w_k
    std::vector<Eigen::MatrixXcd> X;          // q x q projectors

    int ell() const { return static_cast<int>(lambda.size()) - 1; }
    int q() const { return static_cast<int>(V.rows()); }

    /// Lifted projector X_k (x) I_r.
    Eigen::MatrixXcd lifted(int k, int r) const;
};

SpectralData spectral_projectors(const Exosystem& exo);

} // namespace sgtr
