#include "sgtr/lowgain.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "sgtr/lti.hpp"

namespace sgtr {

namespace {

// Polynomial product, coefficients in descending powers.
PolyCoeffs poly_mul(const PolyCoeffs& a, const PolyCoeffs& b) {
    PolyCoeffs out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// Monic real polynomial from a conjugate-closed root set.
PolyCoeffs real_poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> p{1.0};
    for (const auto& root : roots) {
        std::vector<std::complex<double>> next(p.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            next[i] += p[i];
            next[i + 1] -= p[i] * root;
        }
        p = std::move(next);
    }
    PolyCoeffs out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i].real();
    return out;
}

// Faddeev-LeVerrier pass: characteristic polynomial of M (descending, monic)
// and the coefficient rows of adj(sI - M) g, one row per power of s.
struct CharData {
    PolyCoeffs chi;
    Eigen::MatrixXd adj_g; // q x q; row k multiplies s^{q-1-k}
};

CharData char_data(const Eigen::MatrixXd& M, const Eigen::VectorXd& g) {
    const Eigen::Index q = M.rows();
    CharData out;
    out.chi.assign(static_cast<std::size_t>(q) + 1, 0.0);
    out.chi[0] = 1.0;
    out.adj_g.resize(q, q);
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(q, q);
    for (Eigen::Index k = 0; k < q; ++k) {
        out.adj_g.row(k) = (B * g).transpose();
        const Eigen::MatrixXd MB = M * B;
        out.chi[static_cast<std::size_t>(k) + 1] =
            -MB.trace() / static_cast<double>(k + 1);
        B = MB + out.chi[static_cast<std::size_t>(k) + 1] *
                     Eigen::MatrixXd::Identity(q, q);
    }
    return out;
}

Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A,
                                       const Eigen::MatrixXd& B) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    Eigen::MatrixXd ctrb(n, n * m);
    Eigen::MatrixXd block = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        ctrb.middleCols(i * m, m) = block;
        if (i + 1 < n) block = A * block;
    }
    return ctrb;
}

int rank_with_relative_threshold(const Eigen::MatrixXcd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    return rank;
}

} // namespace

PolyCoeffs desired_polynomial(const std::vector<double>& k, const Exosystem& exo,
                              double eps) {
    const auto ell = static_cast<std::size_t>(exo.ell());
    if (k.size() != ell + 1)
        throw ConfigError("desired_polynomial: expected " +
                          std::to_string(ell + 1) + " pole constants, got " +
                          std::to_string(k.size()));
    for (double ki : k)
        if (!(ki > 0.0))
            throw ConfigError("desired_polynomial: pole constants must be positive");
    if (!(eps > 0.0))
        throw ConfigError("desired_polynomial: eps must be positive");

    PolyCoeffs p{1.0, k[0] * eps};
    for (std::size_t i = 0; i < ell; ++i) {
        const double ke = k[i + 1] * eps;
        const double w = exo.frequencies[i];
        p = poly_mul(p, PolyCoeffs{1.0, 2.0 * ke, ke * ke + w * w});
    }
    return p;
}

Eigen::RowVectorXd pole_place(const Eigen::MatrixXd& phi,
                              const Eigen::VectorXd& g,
                              const PolyCoeffs& desired) {
    const Eigen::Index q = phi.rows();
    if (phi.cols() != q || g.size() != q)
        throw ConfigError("pole_place: phi must be square and g of matching size");
    if (static_cast<Eigen::Index>(desired.size()) != q + 1)
        throw ConfigError("pole_place: desired polynomial must have degree q");
    if (std::abs(desired[0] - 1.0) > 1e-9)
        throw ConfigError("pole_place: desired polynomial must be monic");

    const Eigen::MatrixXd ctrb = controllability_matrix(phi, g);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ctrb);
    if (qr.rank() < q)
        throw Error("pole_place: controllability matrix rank-deficient (rank " +
                    std::to_string(qr.rank()) + " of " + std::to_string(q) + ")");

    // The rank-one update identity det(sI - phi + g z) = chi_phi(s) +
    // z adj(sI - phi) g makes the coefficient map affine in z with a constant
    // Jacobian, so the gain is one linear solve in coefficient space. The
    // solve is refined against residuals evaluated through the eigensolver
    // (stable at any gain magnitude), keeping the best iterate.
    double scale = 1.0;
    for (double d : desired) scale = std::max(scale, std::abs(d));
    const CharData base = char_data(phi, g);
    const Eigen::PartialPivLU<Eigen::MatrixXd> jac(base.adj_g);

    const auto residual_at = [&](const Eigen::RowVectorXd& z) {
        const PolyCoeffs coeffs = real_poly_from_roots(eigenvalues(phi - g * z));
        Eigen::VectorXd r(q);
        for (Eigen::Index i = 0; i < q; ++i)
            r(i) = desired[static_cast<std::size_t>(i) + 1] -
                   coeffs[static_cast<std::size_t>(i) + 1];
        return r;
    };

    Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(q);
    Eigen::RowVectorXd best_z = z;
    double best = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 6; ++pass) {
        const Eigen::VectorXd r = residual_at(z);
        const double rmax = r.cwiseAbs().maxCoeff();
        if (rmax < best) {
            best = rmax;
            best_z = z;
        }
        if (!(rmax > 1e-13 * scale)) break;
        z += jac.solve(r).transpose();
    }
    return best_z;
}

Eigen::RowVectorXd SgtrDesign::z_at(double eps) const {
    if (eps < 0.0) throw ConfigError("gain evaluation requires eps >= 0");
    if (eps == 0.0) return Eigen::RowVectorXd::Zero(exo.q());
    return pole_place(servo.phi, servo.g, desired_polynomial(k, exo, eps));
}

Eigen::MatrixXd SgtrDesign::Z_at(double eps) const {
    return Eigen::kroneckerProduct(z_at(eps),
                                   Eigen::MatrixXd::Identity(r(), r()));
}

Eigen::MatrixXd gain_at(const SgtrDesign& design, double eps) {
    if (eps < 0.0) throw ConfigError("gain_at: eps must be nonnegative");
    if (eps == 0.0)
        return Eigen::MatrixXd::Zero(design.m(), design.servo.rq());
    return solve_gain(design.M, design.Z_at(eps));
}

SgtrDesign design_sgtr(const FrequencyData& fd, const Exosystem& exo,
                       std::vector<double> k) {
    fd.validate_against(exo);
    const auto report = check_nonresonance(fd);
    if (!report.pass) {
        std::string what = "non-resonance violated at";
        std::vector<double> sv;
        for (const auto& e : report.entries) {
            if (e.full) continue;
            what += " lambda = " + std::to_string(e.lambda.real()) + "+" +
                    std::to_string(e.lambda.imag()) + "j (rank " +
                    std::to_string(e.rank) + ")";
            sv = e.singular_values;
        }
        throw NonResonanceViolated(what, sv);
    }

    if (k.empty()) k.assign(static_cast<std::size_t>(exo.ell()) + 1, 1.0);
    if (k.size() != static_cast<std::size_t>(exo.ell()) + 1)
        throw ConfigError("design_sgtr: expected " +
                          std::to_string(exo.ell() + 1) + " pole constants");
    for (double ki : k)
        if (!(ki > 0.0))
            throw ConfigError("design_sgtr: pole constants must be positive");

    SgtrDesign design;
    design.exo = exo;
    design.servo = build_servocompensator(exo, fd.r());
    design.spectral = spectral_projectors(exo);
    design.M = build_M(fd, design.spectral);
    design.k = std::move(k);
    design.eps_probe = 1e-2;

    // Gain-class probe: ||F(eps)||/eps must stay bounded as eps -> 0.
    double cmax = 0.0;
    for (int i = 1; i <= 20; ++i) {
        const double eps = design.eps_probe * std::pow(2.0, -i);
        const double ratio = gain_at(design, eps).norm() / eps;
        if (!std::isfinite(ratio))
            throw SolverError("design_sgtr: gain probe produced a non-finite "
                              "value at eps = " +
                              std::to_string(eps));
        cmax = std::max(cmax, ratio);
    }
    design.class_f_constant = cmax;
    return design;
}

bool is_low_gain_stabilizable(const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B) {
    if (A.rows() != A.cols() || B.rows() != A.rows())
        throw ConfigError("is_low_gain_stabilizable: dimension mismatch");
    const Eigen::Index n = A.rows();
    const auto eig = eigenvalues(A);
    double alpha = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eig) alpha = std::max(alpha, ev.real());
    if (alpha > 1e-9) return false;

    // PBH test at every eigenvalue on or near the imaginary axis.
    for (const auto& ev : eig) {
        if (ev.real() < -1e-9) continue;
        Eigen::MatrixXcd pencil(n, n + B.cols());
        pencil.leftCols(n) = A.cast<std::complex<double>>() -
                             ev * Eigen::MatrixXcd::Identity(n, n);
        pencil.rightCols(B.cols()) = B.cast<std::complex<double>>();
        if (rank_with_relative_threshold(pencil) < n) return false;
    }
    return true;
}

StabilityCertificate
certify_low_gain(const std::function<Eigen::MatrixXd(double)>& loop_at,
                 double eps_max, int points) {
    if (points < 8) throw ConfigError("certify_low_gain: need at least 8 points");
    if (!(eps_max > 0.0)) throw ConfigError("certify_low_gain: eps_max must be positive");

    StabilityCertificate cert;
    cert.eps_grid.resize(points);
    cert.alpha.resize(points);
    const double log_lo = std::log(eps_max) - (points - 1) * std::log(2.0);
    double cmin = std::numeric_limits<double>::infinity();
    bool all_stable = true;
    for (int i = 0; i < points; ++i) {
        const double eps =
            std::exp(log_lo + i * (std::log(eps_max) - log_lo) /
                                  std::max(1, points - 1));
        const double a = spectral_abscissa(loop_at(eps));
        cert.eps_grid(i) = eps;
        cert.alpha(i) = a;
        all_stable = all_stable && (a < 0.0);
        cmin = std::min(cmin, -a / eps);
    }
    cert.c = cmin;
    cert.pass = all_stable && cmin >= 1e-6;
    return cert;
}

LyapunovCertificate lyapunov_certificate(const Eigen::MatrixXd& Aeps,
                                         double eps) {
    if (!(eps > 0.0)) throw ConfigError("lyapunov_certificate: eps must be positive");
    if (spectral_abscissa(Aeps) >= 0.0)
        throw NotStableError("lyapunov_certificate: matrix is not Hurwitz");

    const Eigen::Index d = Aeps.rows();
    const Eigen::MatrixXd Q = eps * Eigen::MatrixXd::Identity(d, d);
    // A^T P + P A = -Q is the Sylvester equation P A - (-A^T) P = -Q. The
    // unsymmetric solve leaves an antisymmetric roundoff component whose
    // removal perturbs the residual, so refine within the symmetric subspace
    // until the eps-scaled tolerance holds.
    Eigen::MatrixXd P = sylvester_solve(-Aeps.transpose(), Aeps, -Q);
    P = 0.5 * (P + P.transpose().eval());
    for (int pass = 0; pass < 3; ++pass) {
        const Eigen::MatrixXd R = Aeps.transpose() * P + P * Aeps + Q;
        if (R.norm() <= 1e-11 * eps) break;
        Eigen::MatrixXd dP = sylvester_solve(-Aeps.transpose(), Aeps, -R);
        dP = 0.5 * (dP + dP.transpose().eval());
        P += dP;
    }

    LyapunovCertificate cert;
    cert.P = P;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    if (es.info() != Eigen::Success)
        throw SolverError("lyapunov_certificate: eigensolver failure");
    cert.lambda_min = es.eigenvalues().minCoeff();
    cert.lambda_max = es.eigenvalues().maxCoeff();
    cert.residual = (Aeps.transpose() * P + P * Aeps + Q).norm();
    if (!(cert.residual <= 1e-9 * eps))
        throw SolverError("lyapunov_certificate: residual " +
                          std::to_string(cert.residual) + " exceeds 1e-9*eps");
    return cert;
}

double estimate_eps_star(const std::function<Eigen::MatrixXd(double)>& loop_at,
                         double eps_start) {
    if (!(eps_start > 0.0))
        throw ConfigError("estimate_eps_star: eps_start must be positive");

    double lo = 0.0;
    double hi = eps_start;
    if (spectral_abscissa(loop_at(hi)) < 0.0) {
        lo = hi;
        bool found = false;
        for (int i = 0; i < 60; ++i) {
            hi *= 2.0;
            if (spectral_abscissa(loop_at(hi)) >= 0.0) {
                found = true;
                break;
            }
            lo = hi;
        }
        if (!found) return std::numeric_limits<double>::infinity();
    } else {
        // Requested point already unstable; bracket from below.
        while (hi > 1e-300 && spectral_abscissa(loop_at(hi / 2.0)) >= 0.0)
            hi /= 2.0;
        lo = hi / 2.0;
        if (!(lo > 0.0)) return 0.0;
    }

    while ((hi - lo) > 5e-3 * hi) {
        const double mid = 0.5 * (lo + hi);
        (spectral_abscissa(loop_at(mid)) < 0.0 ? lo : hi) = mid;
    }
    const double value = 0.5 * (lo + hi);
    const double mag = std::pow(10.0, std::floor(std::log10(value)) - 1.0);
    return std::round(value / mag) * mag; // 2 significant figures
}

void write_certificate_csv(const StabilityCertificate& cert, double eps_star,
                           std::ostream& os) {
    os << "eps,alpha,ratio\n";
    char buf[40];
    for (Eigen::Index i = 0; i < cert.eps_grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", cert.eps_grid(i));
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", cert.alpha(i));
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", -cert.alpha(i) / cert.eps_grid(i));
        os << buf << "\n";
    }
    std::snprintf(buf, sizeof buf, "%.12g", cert.c);
    os << "# c=" << buf << ",verdict=" << (cert.pass ? "pass" : "fail");
    std::snprintf(buf, sizeof buf, "%.12g", eps_star);
    os << ",eps_star=" << buf << "\n";
}

} // namespace sgtr
