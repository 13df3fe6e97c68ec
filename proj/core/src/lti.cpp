#include "sgtr/lti.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace sgtr {

namespace {

void check_dimensions(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                      const Eigen::MatrixXd& Bd, const Eigen::MatrixXd& Dd) {
    const auto n = A.rows();
    if (A.cols() != n) throw ConfigError("plant A must be square");
    if (B.rows() != n) throw ConfigError("plant B row count must match A");
    if (C.cols() != n) throw ConfigError("plant C column count must match A");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw ConfigError("plant D must be r x m");
    if (C.rows() > B.cols())
        throw ConfigError("plant requires r <= m (errors vs inputs)");
    if (Bd.size() > 0 || Dd.size() > 0) {
        if (Bd.rows() != n) throw ConfigError("plant Bd row count must match A");
        if (Dd.rows() != C.rows() || Dd.cols() != Bd.cols())
            throw ConfigError("plant Dd must be r x nd");
    }
}

} // namespace

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_,
                                 Eigen::MatrixXd C_, Eigen::MatrixXd D_)
    : StateSpaceModel(std::move(A_), std::move(B_), std::move(C_), std::move(D_),
                      Eigen::MatrixXd(), Eigen::MatrixXd()) {}

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_,
                                 Eigen::MatrixXd C_, Eigen::MatrixXd D_,
                                 Eigen::MatrixXd Bd_, Eigen::MatrixXd Dd_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)),
      Bd(std::move(Bd_)), Dd(std::move(Dd_)) {
    check_dimensions(A, B, C, D, Bd, Dd);
    if (Bd.size() == 0) {
        Bd = Eigen::MatrixXd::Zero(A.rows(), 0);
        Dd = Eigen::MatrixXd::Zero(C.rows(), 0);
    }
    alpha_ = spectral_abscissa(A);
}

void StateSpaceModel::require_stable(const char* who) const {
    if (!is_stable()) {
        throw NotStableError(std::string(who) +
                             ": plant not stable (spectral abscissa " +
                             std::to_string(alpha_) + ")");
    }
}

ExogenousSignal::ExogenousSignal(Eigen::VectorXd constant,
                                 std::vector<Harmonic> harm)
    : constant_offset(std::move(constant)), harmonics(std::move(harm)) {
    double prev = 0.0;
    for (const auto& h : harmonics) {
        if (!(h.omega > prev))
            throw ConfigError("exogenous-signal frequencies must be strictly "
                              "positive and strictly increasing");
        if (h.cos_amp.size() != constant_offset.size() ||
            h.sin_amp.size() != constant_offset.size())
            throw ConfigError("exogenous-signal amplitude dimension mismatch");
        prev = h.omega;
    }
}

ExogenousSignal ExogenousSignal::zero(int nd) {
    return ExogenousSignal(Eigen::VectorXd::Zero(nd));
}

double ExogenousSignal::max_frequency() const {
    return harmonics.empty() ? 0.0 : harmonics.back().omega;
}

Eigen::VectorXd ExogenousSignal::value(double t) const {
    Eigen::VectorXd d = constant_offset;
    for (const auto& h : harmonics) {
        d += h.cos_amp * std::cos(h.omega * t) + h.sin_amp * std::sin(h.omega * t);
    }
    return d;
}

Eigen::MatrixXcd eval_transfer(const StateSpaceModel& model,
                               std::complex<double> s) {
    const int n = model.n();
    Eigen::MatrixXcd sIA =
        s * Eigen::MatrixXcd::Identity(n, n) - model.A.cast<std::complex<double>>();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(sIA);
    if (!lu.isInvertible()) {
        std::ostringstream os;
        os << "eigenvalue collision: s = " << s.real() << (s.imag() < 0 ? "-" : "+")
           << std::abs(s.imag()) << "j is an eigenvalue of A";
        throw EigenvalueCollision(os.str());
    }
    return model.C.cast<std::complex<double>>() *
               lu.solve(model.B.cast<std::complex<double>>()) +
           model.D.cast<std::complex<double>>();
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw ConfigError("eigenvalues: matrix not square");
    if (M.rows() == 0) return {};
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw SolverError("eigensolver failed to converge");
    std::vector<std::complex<double>> ev(static_cast<std::size_t>(M.rows()));
    for (Eigen::Index i = 0; i < M.rows(); ++i) ev[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return ev;
}

double spectral_abscissa(const Eigen::MatrixXd& M) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues(M)) worst = std::max(worst, ev.real());
    return worst;
}

Eigen::MatrixXd sylvester_solve(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& Phi,
                                const Eigen::MatrixXd& R) {
    const Eigen::Index n = A.rows();
    const Eigen::Index p = Phi.rows();
    if (A.cols() != n || Phi.cols() != p)
        throw ConfigError("sylvester_solve: A and Phi must be square");
    if (R.rows() != n || R.cols() != p)
        throw ConfigError("sylvester_solve: R must be n x p");
    if (n * p > 4000)
        throw CapacityError("sylvester_solve: n*p = " + std::to_string(n * p) +
                            " exceeds the dense capacity guard (4000)");

    // Spectra must be disjoint or the operator is singular.
    const auto eigA = eigenvalues(A);
    const auto eigPhi = eigenvalues(Phi);
    double scale = 1.0;
    for (const auto& a : eigA) scale = std::max(scale, std::abs(a));
    for (const auto& b : eigPhi) scale = std::max(scale, std::abs(b));
    for (const auto& a : eigA) {
        for (const auto& b : eigPhi) {
            if (std::abs(a - b) <= 1e-12 * scale) {
                std::ostringstream os;
                os << "resonant Sylvester equation: eig(A) and eig(Phi) overlap "
                      "near "
                   << a.real() << (a.imag() < 0 ? "-" : "+") << std::abs(a.imag())
                   << "j";
                throw ResonantSylvester(os.str());
            }
        }
    }

    // vec(Pi Phi - A Pi) = (Phi^T (x) I_n - I_p (x) A) vec(Pi).
    const Eigen::MatrixXd In = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd Ip = Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd K = Eigen::kroneckerProduct(Phi.transpose(), In) -
                        Eigen::kroneckerProduct(Ip, A);
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(R.data(), R.size());
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    Eigen::VectorXd x = lu.solve(rhs);
    x += lu.solve(rhs - K * x); // one refinement pass
    Eigen::MatrixXd Pi = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, p);

    const double residual = (Pi * Phi - A * Pi - R).norm();
    if (!(residual <= 1e-10 * (1.0 + R.norm()))) {
        throw ResonantSylvester(
            "Sylvester solve residual " + std::to_string(residual) +
            " exceeds tolerance; spectra are too close to resonance");
    }
    return Pi;
}

ClosedLoopModel assemble_closed_loop(const StateSpaceModel& plant,
                                     const ServoCompensator& servo,
                                     const Eigen::MatrixXd& F) {
    const int n = plant.n();
    const int m = plant.m();
    const int r = plant.r();
    const int rq = servo.rq();
    const int nd = plant.nd();
    if (servo.r != r)
        throw ConfigError("assemble_closed_loop: servo error dimension " +
                          std::to_string(servo.r) + " does not match plant r = " +
                          std::to_string(r));
    if (F.rows() != m || F.cols() != rq)
        throw ConfigError("assemble_closed_loop: F must be m x rq = " +
                          std::to_string(m) + " x " + std::to_string(rq));

    ClosedLoopModel cl;
    cl.n = n;
    cl.r = r;
    cl.m = m;
    cl.rq = rq;
    cl.nd = nd;

    cl.A.setZero(n + rq, n + rq);
    cl.A.topLeftCorner(n, n) = plant.A;
    cl.A.topRightCorner(n, rq) = -plant.B * F;
    cl.A.bottomLeftCorner(rq, n) = servo.G * plant.C;
    cl.A.bottomRightCorner(rq, rq) = servo.Phi - servo.G * plant.D * F;

    cl.Bd.setZero(n + rq, nd);
    cl.Bd.topRows(n) = plant.Bd;
    cl.Bd.bottomRows(rq) = servo.G * plant.Dd;

    cl.C.setZero(r, n + rq);
    cl.C.leftCols(n) = plant.C;
    cl.C.rightCols(rq) = -plant.D * F;

    cl.Dd = plant.Dd;

    cl.K.setZero(m, n + rq);
    cl.K.rightCols(rq) = -F;
    return cl;
}

double default_time_step(const ExogenousSignal& d) {
    const double wmax = d.max_frequency();
    return wmax > 0.0 ? std::min(0.01, 0.05 / wmax) : 0.01;
}

Trajectory simulate(const ClosedLoopModel& loop, const ExogenousSignal& d,
                    const Eigen::VectorXd& x0, double horizon, double dt) {
    if (!(dt > 0.0)) throw ConfigError("simulate: dt must be positive");
    if (!(horizon >= dt)) throw ConfigError("simulate: horizon must be >= dt");
    const int nx = loop.dim();
    if (x0.size() != nx)
        throw ConfigError("simulate: x0 dimension must be " + std::to_string(nx));
    if (d.dim() != loop.nd)
        throw ConfigError("simulate: disturbance dimension must be " +
                          std::to_string(loop.nd));

    // One matrix exponential of [[A, Bd],[0,0]] gives the exact hold update.
    const int nd = loop.nd;
    Eigen::MatrixXd Maug = Eigen::MatrixXd::Zero(nx + nd, nx + nd);
    Maug.topLeftCorner(nx, nx) = loop.A;
    Maug.topRightCorner(nx, nd) = loop.Bd;
    const Eigen::MatrixXd E = (Maug * dt).exp();
    const Eigen::MatrixXd Ad = E.topLeftCorner(nx, nx);
    const Eigen::MatrixXd Bd = E.topRightCorner(nx, nd);

    const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
    const Eigen::Index count = std::max<Eigen::Index>(steps, 1) + 1;

    Trajectory traj;
    traj.dt = dt;
    traj.time.resize(count);
    traj.state.resize(nx, count);
    traj.input.resize(loop.m, count);
    traj.error.resize(loop.r, count);

    Eigen::VectorXd x = x0;
    for (Eigen::Index i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) * dt;
        const Eigen::VectorXd di = d.value(t);
        traj.time(i) = t;
        traj.state.col(i) = x;
        traj.input.col(i) = loop.K * x;
        traj.error.col(i) = loop.C * x + loop.Dd * di;
        if (!traj.state.col(i).allFinite() || !traj.error.col(i).allFinite()) {
            throw DivergenceError(
                "simulation diverged at t = " + std::to_string(t), t);
        }
        if (i + 1 < count) x = Ad * x + Bd * di;
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    const auto r = traj.error.rows();
    const auto m = traj.input.rows();
    os << "t";
    for (Eigen::Index i = 0; i < r; ++i) os << ",e_" << (i + 1);
    for (Eigen::Index i = 0; i < m; ++i) os << ",u_" << (i + 1);
    os << "\n";
    char buf[40];
    for (Eigen::Index c = 0; c < traj.time.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.12g", traj.time(c));
        os << buf;
        for (Eigen::Index i = 0; i < r; ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", traj.error(i, c));
            os << ',' << buf;
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", traj.input(i, c));
            os << ',' << buf;
        }
        os << "\n";
    }
}

} // namespace sgtr
