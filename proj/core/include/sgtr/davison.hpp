#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sgtr/lti.hpp"
#include "sgtr/servo.hpp"

namespace sgtr {

/// Davison's original tuning regulator: one gain block per exosystem mode,
/// each with its own scalar tuning gain, closed sequentially.
struct DavisonDesign {
    Eigen::MatrixXd F0;              // m x r, constant stage
    std::vector<Eigen::MatrixXd> Fk; // m x 2r per harmonic, block [Fk1 Fk2]
    std::vector<double> eps;         // ell+1 tuning gains, constant first
    std::vector<int> order;          // closure sequence over blocks 0..ell

    /// Aggregated gain [eps0 F0, eps1 F1, ...] against the canonical
    /// servocompensator layout; m x rq.
    Eigen::MatrixXd combined_gain() const;
};

/// F0 = pinv(P(0)). Requires full row rank.
Eigen::MatrixXd davison_gain_constant(const Eigen::MatrixXd& P0);

/// Fk = [Fk1 Fk2] with Fk1 = 2 w pinv(Im P(jw)), Fk2 = 2 pinv(Re P(jw)).
/// Requires the complex sample to have full row rank; rank deficiency of the
/// real or imaginary part alone is permitted.
Eigen::MatrixXd davison_gain_harmonic(const Eigen::MatrixXcd& Pjw, double omega);

struct DavisonResult {
    DavisonDesign design;
    ClosedLoopModel loop;
};

/// Sequential loop closing: the constant stage first from open-loop DC gain,
/// then each harmonic stage from the frequency response of the loop closed so
/// far (evaluated analytically on the augmented state space). Every stage
/// must leave the loop Hurwitz. A custom closure order may be supplied;
/// the default is constant first, then ascending frequency.
DavisonResult davison_sequential_design(const StateSpaceModel& plant,
                                        const Exosystem& exo,
                                        const std::vector<double>& eps,
                                        std::vector<int> order = {});

/// Supremum of stabilizing eps_1 for the first harmonic stage, given the
/// constant stage closed at eps0. Doubling scan plus bisection.
double davison_eps1_stability_upper(const StateSpaceModel& plant,
                                    const Exosystem& exo, double eps0);

} // namespace sgtr
