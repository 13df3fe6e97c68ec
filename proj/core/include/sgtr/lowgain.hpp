#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "sgtr/errors.hpp"
#include "sgtr/servo.hpp"
#include "sgtr/sslg.hpp"

namespace sgtr {

/// Monic real polynomial, coefficients in descending powers (coeffs[0] = 1).
using PolyCoeffs = std::vector<double>;

/// Coefficients of (s + k0 e) * prod_i (s^2 + 2 ki e s + (ki e)^2 + w_i^2).
/// Requires len(k) = ell + 1, all entries and eps positive.
PolyCoeffs desired_polynomial(const std::vector<double>& k, const Exosystem& exo,
                              double eps);

/// Single-input pole placement: row z such that char(phi - g z) = desired.
/// Ackermann's formula through the controllability matrix of (phi, g).
Eigen::RowVectorXd pole_place(const Eigen::MatrixXd& phi,
                              const Eigen::VectorXd& g,
                              const PolyCoeffs& desired);

/// A complete gain design: everything needed to evaluate F(eps) for any eps.
/// The operator matrix M is eps-independent and assembled once.
struct SgtrDesign {
    Exosystem exo;
    ServoCompensator servo;
    SpectralData spectral;
    OperatorMatrix M;
    std::vector<double> k;        // ell+1 positive pole constants
    double eps_probe = 0.0;       // upper end of the gain-class probe grid
    double class_f_constant = 0.0; // max ||F(eps)||/eps over the probe grid

    int r() const { return servo.r; }
    int m() const { return M.m; }

    /// Pole-placement row for phi - g z(eps); z(0) = 0.
    Eigen::RowVectorXd z_at(double eps) const;
    /// Z(eps) = z(eps) (x) I_r.
    Eigen::MatrixXd Z_at(double eps) const;
};

/// Runs the full design pipeline on frequency data: non-resonance check,
/// servocompensator and projector construction, operator-matrix assembly,
/// and a numeric probe of the O(eps) gain bound. Empty k defaults to all 1.
SgtrDesign design_sgtr(const FrequencyData& fd, const Exosystem& exo,
                       std::vector<double> k = {});

/// F(eps) solving L(F(eps)) = z(eps) (x) I_r; F(0) = 0.
Eigen::MatrixXd gain_at(const SgtrDesign& design, double eps);

/// True iff (A, B) is stabilizable (PBH at every closed-right-half-plane
/// eigenvalue) and the spectrum of A lies in the closed left half plane.
bool is_low_gain_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Grid evidence that alpha(A(eps)) <= -c eps with some c > 0.
struct StabilityCertificate {
    Eigen::VectorXd eps_grid; // ascending
    Eigen::VectorXd alpha;    // spectral abscissa per grid point
    double c = 0.0;           // min over grid of -alpha/eps
    bool pass = false;

    struct LyapunovWitness {
        double eps = 0.0;
        double lambda_min = 0.0;
        double lambda_max = 0.0;
        double residual = 0.0;
    };
    std::vector<LyapunovWitness> lyapunov; // optional
};

/// Evaluates the abscissa on a log-spaced grid over
/// [eps_max * 2^-(points-1), eps_max]; pass iff every point is strictly
/// stable and the fitted margin constant c = min(-alpha/eps) >= 1e-6.
StabilityCertificate
certify_low_gain(const std::function<Eigen::MatrixXd(double)>& loop_at,
                 double eps_max, int points = 24);

struct LyapunovCertificate {
    Eigen::MatrixXd P;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double residual = 0.0;
};

/// Solves A^T P + P A = -eps I for a Hurwitz A(eps) and reports the spectral
/// bounds of P; boundedness of lambda_max across an eps grid witnesses the
/// low-gain margin.
LyapunovCertificate lyapunov_certificate(const Eigen::MatrixXd& Aeps, double eps);

/// Upper stability threshold: geometric scan upward from eps_start until the
/// abscissa crosses zero, then bisection; rounded to 2 significant figures.
/// Returns +inf if no instability is found within the scan cap.
double estimate_eps_star(const std::function<Eigen::MatrixXd(double)>& loop_at,
                         double eps_start);

/// CSV export: eps,alpha,ratio rows plus a trailing summary line.
void write_certificate_csv(const StabilityCertificate& cert, double eps_star,
                           std::ostream& os);

} // namespace sgtr
