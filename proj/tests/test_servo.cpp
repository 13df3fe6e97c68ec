#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "sgtr/lti.hpp"
#include "sgtr/servo.hpp"

using namespace sgtr;

TEST_CASE("build_exosystem validates and sizes the root set") {
    const Exosystem empty = build_exosystem({});
    CHECK(empty.q() == 1);
    REQUIRE(empty.roots_all().size() == 1);
    CHECK(empty.roots_all()[0] == std::complex<double>(0.0, 0.0));

    const Exosystem four_tank = build_exosystem({0.01, 0.1});
    CHECK(four_tank.q() == 5);
    const auto roots = four_tank.roots_all();
    const std::vector<std::complex<double>> expected{
        {0, 0}, {0, 0.01}, {0, -0.01}, {0, 0.1}, {0, -0.1}};
    CHECK(oracles::pairing_distance(expected, roots) == 0.0);

    CHECK_THROWS_AS(build_exosystem({0.1, 0.01}), ConfigError);
    CHECK_THROWS_AS(build_exosystem({0.1, 0.1}), ConfigError);
    CHECK_THROWS_AS(build_exosystem({-1.0}), ConfigError);
    CHECK_THROWS_AS(build_exosystem({0.0}), ConfigError);
    CHECK_THROWS_AS(build_exosystem({1.0, 1.0 + 1e-12}), ConfigError);
}

TEST_CASE("build_servocompensator block structure") {
    const ServoCompensator constant = build_servocompensator(build_exosystem({}), 2);
    CHECK(constant.Phi.isZero(0.0));
    CHECK((constant.G - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);

    const ServoCompensator one = build_servocompensator(build_exosystem({2.0}), 1);
    Eigen::MatrixXd phi_expected(3, 3);
    phi_expected << 0, 0, 0, 0, 0, 1, 0, -4, 0;
    Eigen::VectorXd g_expected(3);
    g_expected << 1, 0, 1;
    CHECK((one.phi - phi_expected).norm() == 0.0);
    CHECK((one.g - g_expected).norm() == 0.0);

    const ServoCompensator ft = build_servocompensator(build_exosystem({0.01, 0.1}), 2);
    CHECK(ft.Phi.rows() == 10);
    CHECK(ft.Phi.cols() == 10);
    CHECK(ft.G.rows() == 10);
    CHECK(ft.G.cols() == 2);

    CHECK_THROWS_AS(build_servocompensator(build_exosystem({}), 0), ConfigError);
}

TEST_CASE("(phi, g) is controllable and eig(Phi) replicates the roots r times") {
    for (int r : {1, 2, 3}) {
        const Exosystem exo = build_exosystem({0.5, 1.25, 4.0});
        const ServoCompensator servo = build_servocompensator(exo, r);
        const int q = servo.q();

        Eigen::MatrixXd ctrb(q, q);
        Eigen::VectorXd col = servo.g;
        for (int i = 0; i < q; ++i) {
            ctrb.col(i) = col;
            col = servo.phi * col;
        }
        CHECK(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(ctrb).rank() == q);

        std::vector<std::complex<double>> expected;
        for (const auto& root : exo.roots_all())
            for (int i = 0; i < r; ++i) expected.push_back(root);
        CHECK(oracles::pairing_distance(expected, eigenvalues(servo.Phi)) < 1e-9);
    }
}

TEST_CASE("PBH rank holds at every eigenvalue of phi") {
    const Exosystem exo = build_exosystem({0.3, 2.0});
    const ServoCompensator servo = build_servocompensator(exo, 1);
    const int q = servo.q();
    for (const auto& lambda : exo.roots_all()) {
        Eigen::MatrixXcd pencil(q, q + 1);
        pencil.leftCols(q) = servo.phi.cast<std::complex<double>>() -
                             lambda * Eigen::MatrixXcd::Identity(q, q);
        pencil.col(q) = servo.g.cast<std::complex<double>>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
        CHECK(svd.singularValues()(q - 1) > 1e-10 * svd.singularValues()(0));
    }
}

TEST_CASE("spectral projectors: closed forms and identities") {
    const SpectralData trivial = spectral_projectors(build_exosystem({}));
    REQUIRE(trivial.X.size() == 1);
    CHECK(trivial.X[0](0, 0) == std::complex<double>(1.0, 0.0));

    // Unit-frequency block projector against its stated closed form.
    const SpectralData unit = spectral_projectors(build_exosystem({1.0}));
    Eigen::MatrixXcd expected(2, 2);
    expected << std::complex<double>(0.5, 0), std::complex<double>(0, -0.5),
        std::complex<double>(0, 0.5), std::complex<double>(0.5, 0);
    CHECK((unit.X[1].block(1, 1, 2, 2) - expected).norm() < 1e-15);
}

TEST_CASE("projector identities for a range of exosystems") {
    for (const auto& freqs : std::vector<std::vector<double>>{
             {}, {1.0}, {0.01, 0.1}, {0.5, 1.0, 2.0, 3.5}}) {
        const Exosystem exo = build_exosystem(freqs);
        const SpectralData sd = spectral_projectors(exo);
        const int q = exo.q();
        const int ell = exo.ell();

        // Eigen-relations.
        const Eigen::MatrixXcd phi =
            build_servocompensator(exo, 1).phi.cast<std::complex<double>>();
        for (int k = 0; k <= ell; ++k) {
            const auto lambda = sd.lambda[static_cast<std::size_t>(k)];
            CHECK((phi * sd.V.col(k) - lambda * sd.V.col(k)).norm() < 1e-12);
            CHECK((sd.W.row(k) * phi - lambda * sd.W.row(k)).norm() < 1e-12);
        }

        // Biorthogonality including conjugate pairs.
        for (int jdx = 0; jdx <= ell; ++jdx) {
            for (int k = 0; k <= ell; ++k) {
                const std::complex<double> wv = (sd.W.row(jdx) * sd.V.col(k))(0, 0);
                CHECK(std::abs(wv - (jdx == k ? 1.0 : 0.0)) < 1e-12);
                if (k > 0) {
                    const std::complex<double> wvc =
                        (sd.W.row(jdx) * sd.V.col(k).conjugate())(0, 0);
                    if (jdx != 0)
                        CHECK(std::abs(wvc) < 1e-12);
                }
            }
        }

        // Idempotency and resolution of identity.
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(q, q);
        for (int k = 0; k <= ell; ++k) {
            const auto& X = sd.X[static_cast<std::size_t>(k)];
            CHECK((X * X - X).norm() < 1e-12);
            sum += (k == 0) ? X : Eigen::MatrixXcd(X + X.conjugate());
        }
        CHECK((sum - Eigen::MatrixXcd::Identity(q, q)).norm() < 1e-12);
    }
}

TEST_CASE("closed-form projectors match a numerical eigendecomposition") {
    const Exosystem exo = build_exosystem({0.25, 1.5, 3.0});
    const SpectralData sd = spectral_projectors(exo);
    const Eigen::MatrixXd phi = build_servocompensator(exo, 1).phi;

    Eigen::EigenSolver<Eigen::MatrixXd> es(phi);
    REQUIRE(es.info() == Eigen::Success);
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::MatrixXcd W = V.inverse();

    for (int k = 0; k <= exo.ell(); ++k) {
        const auto lambda = sd.lambda[static_cast<std::size_t>(k)];
        // Find the numerically computed eigenvalue matching lambda.
        int match = -1;
        for (int i = 0; i < phi.rows(); ++i)
            if (std::abs(es.eigenvalues()(i) - lambda) < 1e-9) match = i;
        REQUIRE(match >= 0);
        const Eigen::MatrixXcd X_numeric = V.col(match) * W.row(match);
        CHECK((X_numeric - sd.X[static_cast<std::size_t>(k)]).norm() < 1e-10);
    }
}
