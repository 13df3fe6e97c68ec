#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "sgtr/errors.hpp"
#include "sgtr/servo.hpp"

namespace sgtr {

/// Continuous-time LTI plant
///   dx/dt = A x + B u + Bd d
///   e     = C x + D u + Dd d
/// with m inputs, r regulated error outputs (r <= m) and nd optional
/// exogenous-input channels. Treat instances as immutable after construction.
struct StateSpaceModel {
    Eigen::MatrixXd A, B, C, D;
    Eigen::MatrixXd Bd, Dd; // n x nd and r x nd; 0-column when nd == 0

    StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_,
                    Eigen::MatrixXd D_);
    StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_,
                    Eigen::MatrixXd D_, Eigen::MatrixXd Bd_, Eigen::MatrixXd Dd_);

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int r() const { return static_cast<int>(C.rows()); }
    int nd() const { return static_cast<int>(Bd.cols()); }

    /// Spectral abscissa of A, computed once at construction.
    double alpha() const { return alpha_; }
    bool is_stable() const { return alpha_ < kStabilityTol; }
    /// Throws NotStableError unless is_stable().
    void require_stable(const char* who) const;

    static constexpr double kStabilityTol = -1e-12;

  private:
    double alpha_ = 0.0;
};

struct Harmonic {
    double omega = 0.0;      // rad/s
    Eigen::VectorXd cos_amp; // nd
    Eigen::VectorXd sin_amp; // nd
};

/// d(t) = constant + sum_k [cos_amp_k cos(w_k t) + sin_amp_k sin(w_k t)].
/// This parameterization spans exactly the outputs of a semisimple
/// imaginary-spectrum signal generator.
struct ExogenousSignal {
    Eigen::VectorXd constant_offset;
    std::vector<Harmonic> harmonics; // frequencies strictly increasing, > 0

    ExogenousSignal(Eigen::VectorXd constant, std::vector<Harmonic> harm = {});
    static ExogenousSignal zero(int nd);

    int dim() const { return static_cast<int>(constant_offset.size()); }
    double max_frequency() const; // 0 when purely constant
    Eigen::VectorXd value(double t) const;
};

/// Fixed-step simulation record. Columns are samples on the uniform grid.
struct Trajectory {
    Eigen::VectorXd time;
    Eigen::MatrixXd state; // nx x N
    Eigen::MatrixXd input; // m x N
    Eigen::MatrixXd error; // r x N
    double dt = 0.0;
};

/// Plant + servocompensator interconnection
///   d/dt [x; eta] = A [x; eta] + Bd d,  e = C [x; eta] + Dd d
/// with the applied input recoverable as u = K [x; eta].
struct ClosedLoopModel {
    Eigen::MatrixXd A;  // (n+rq) x (n+rq)
    Eigen::MatrixXd Bd; // (n+rq) x nd
    Eigen::MatrixXd C;  // r x (n+rq)
    Eigen::MatrixXd Dd; // r x nd
    Eigen::MatrixXd K;  // m x (n+rq)
    int n = 0, r = 0, m = 0, rq = 0, nd = 0;

    int dim() const { return n + rq; }
};

/// P(s) = C (sI - A)^{-1} B + D. Throws EigenvalueCollision when s is an
/// eigenvalue of A.
Eigen::MatrixXcd eval_transfer(const StateSpaceModel& model,
                               std::complex<double> s);

/// Max real part over eig(M).
double spectral_abscissa(const Eigen::MatrixXd& M);

/// All eigenvalues of a real square matrix.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M);

/// Unique solution of  Pi Phi - A Pi = R  via the dense Kronecker-vectorized
/// linear system. Requires disjoint spectra; sizes are guarded (n*p <= 4000).
Eigen::MatrixXd sylvester_solve(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& Phi,
                                const Eigen::MatrixXd& R);

/// Builds the closed loop [[A, -B F], [G C, Phi - G D F]] together with the
/// exogenous-input and error-output maps.
ClosedLoopModel assemble_closed_loop(const StateSpaceModel& plant,
                                     const ServoCompensator& servo,
                                     const Eigen::MatrixXd& F);

/// Exact zero-order-hold simulation: the transition pair is a single matrix
/// exponential of the augmented block matrix, and d is sampled at step
/// boundaries. Throws DivergenceError at the first non-finite sample.
Trajectory simulate(const ClosedLoopModel& loop, const ExogenousSignal& d,
                    const Eigen::VectorXd& x0, double horizon, double dt);

/// Default step: min(0.01, 0.05 / w_max).
double default_time_step(const ExogenousSignal& d);

/// CSV export: header t,e_1..e_r,u_1..u_m, 12 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

} // namespace sgtr
