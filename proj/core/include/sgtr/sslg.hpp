#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgtr/errors.hpp"
#include "sgtr/lti.hpp"
#include "sgtr/servo.hpp"

namespace sgtr {

struct FrequencySample {
    double omega = 0.0;
    Eigen::MatrixXcd response; // r x m, P(j w)
};

/// The only plant knowledge the design consumes: the DC gain P(0) and one
/// complex frequency-response sample per exosystem frequency, in the
/// exosystem's order.
struct FrequencyData {
    Eigen::MatrixXd P0;                 // r x m
    std::vector<FrequencySample> samples;
    std::string provenance = "analytic"; // "analytic" or "identified"

    int r() const { return static_cast<int>(P0.rows()); }
    int m() const { return static_cast<int>(P0.cols()); }
    int ell() const { return static_cast<int>(samples.size()); }

    /// Checks the sample frequencies match the exosystem list exactly.
    void validate_against(const Exosystem& exo) const;
};

struct RankEntry {
    std::complex<double> lambda;
    int rank = 0;
    bool full = false;
    std::vector<double> singular_values;
};

struct NonResonanceReport {
    std::vector<RankEntry> entries; // P(0) first, then each harmonic sample
    bool pass = false;
};

/// Rank of every sample via singular values with relative threshold
/// 1e-10 * sigma_max; pass iff every sample has full row rank r.
NonResonanceReport check_nonresonance(const FrequencyData& fd);

/// Steady-state loop gain from frequency data alone:
///   L(F) = P(0) F X0 + 2 sum_k Re{ P(j w_k) F Xk },  Xk lifted by I_r.
/// The residue sum is accumulated in complex arithmetic; a non-negligible
/// imaginary remainder trips an internal-consistency error.
Eigen::MatrixXd sslg_apply_data(const FrequencyData& fd,
                                const SpectralData& spec,
                                const Eigen::MatrixXd& F);

/// Model-based route: L(F) = C Pi + D F with Pi the Sylvester solution of
/// Pi Phi - A Pi = B F. Serves as the independent oracle for the data route.
Eigen::MatrixXd sslg_apply_model(const StateSpaceModel& plant,
                                 const ServoCompensator& servo,
                                 const Eigen::MatrixXd& F);

/// The operator L in vectorized form: M vec(F) = vec(L(F)) with column-wise
/// vec, so M = X0^T (x) P(0) + 2 sum_k Re{ Xk^T (x) P(j w_k) }.
struct OperatorMatrix {
    Eigen::MatrixXd M; // (r*rq) x (m*rq)
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    int r = 0, m = 0, rq = 0;

    double cond() const;
};

OperatorMatrix build_M(const FrequencyData& fd, const SpectralData& spec);

/// Solves L(F) = Z for F. Unique when r = m; minimum-Frobenius-norm when
/// m > r. Throws NonResonanceViolated (carrying the singular values) when M
/// is row-rank deficient.
Eigen::MatrixXd solve_gain(const OperatorMatrix& Mx, const Eigen::MatrixXd& Z);

/// File format: real and imaginary parts as separate row-major arrays per
/// frequency. Finite doubles round-trip exactly.
std::string frequency_data_to_json(const FrequencyData& fd);
FrequencyData frequency_data_from_json(const std::string& text);
void save_frequency_data(const FrequencyData& fd, const std::string& path);
FrequencyData load_frequency_data(const std::string& path);

} // namespace sgtr
