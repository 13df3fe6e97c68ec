#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "oracles.hpp"
#include "sgtr/ident.hpp"
#include "sgtr/lti.hpp"
#include "sgtr/servo.hpp"
#include "sgtr/sslg.hpp"

using namespace sgtr;

namespace {

FrequencyData constant_only(double p0) {
    FrequencyData fd;
    fd.P0.resize(1, 1);
    fd.P0 << p0;
    return fd;
}

struct RandomCase {
    StateSpaceModel plant;
    Exosystem exo;
    ServoCompensator servo;
    SpectralData spectral;
    FrequencyData fd;
};

RandomCase random_case(oracles::Rng& rng, int n, int r, int m, int ell) {
    std::vector<double> freqs;
    double w = 0.0;
    for (int i = 0; i < ell; ++i) {
        w += 0.3 + 2.5 * rng.uniform();
        freqs.push_back(w);
    }
    Eigen::MatrixXd A = oracles::random_stable_A(rng, n, 0.4 + 1.6 * rng.uniform());
    StateSpaceModel plant(A, oracles::random_matrix(rng, n, m),
                          oracles::random_matrix(rng, r, n),
                          0.3 * oracles::random_matrix(rng, r, m));
    Exosystem exo = build_exosystem(freqs);
    ServoCompensator servo = build_servocompensator(exo, r);
    SpectralData spectral = spectral_projectors(exo);
    FrequencyData fd = analytic_frequency_data(plant, exo);
    return RandomCase{std::move(plant), std::move(exo), std::move(servo),
                      std::move(spectral), std::move(fd)};
}

// Transmission zero at s^2 + wz^2: P(s) = (s^2 + wz^2) / (s + 1)^3 realized in
// controllable canonical form.
StateSpaceModel zero_pair_plant(double wz) {
    Eigen::MatrixXd A(3, 3);
    A << 0, 1, 0, 0, 0, 1, -1, -3, -3;
    Eigen::MatrixXd B(3, 1);
    B << 0, 0, 1;
    Eigen::MatrixXd C(1, 3);
    C << wz * wz, 0, 1;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(1, 1);
    return StateSpaceModel(A, B, C, D);
}

} // namespace

TEST_CASE("sslg_apply_data constant-only and linear in F") {
    FrequencyData fd = constant_only(2.0);
    const SpectralData spec = spectral_projectors(build_exosystem({}));
    Eigen::MatrixXd F(1, 1);
    F << 3.0;
    CHECK(sslg_apply_data(fd, spec, F)(0, 0) == doctest::Approx(6.0));
    CHECK(sslg_apply_data(fd, spec, Eigen::MatrixXd::Zero(1, 1)).norm() == 0.0);
}

TEST_CASE("sslg_apply_model constant-only matches the DC gain") {
    Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A << -1;
    B << 1;
    C << 1;
    D << 0;
    StateSpaceModel plant(A, B, C, D);
    const ServoCompensator servo = build_servocompensator(build_exosystem({}), 1);
    Eigen::MatrixXd F(1, 1);
    F << 0.7;
    CHECK(sslg_apply_model(plant, servo, F)(0, 0) == doctest::Approx(0.7));
}

TEST_CASE("sslg on a feedthrough-only plant reduces to D F") {
    oracles::Rng rng(42);
    const int r = 2, m = 3;
    Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, m);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(r, 2);
    Eigen::MatrixXd D = oracles::random_matrix(rng, r, m);
    StateSpaceModel plant(A, B, C, D);
    const Exosystem exo = build_exosystem({1.0, 2.5});
    const ServoCompensator servo = build_servocompensator(exo, r);
    const Eigen::MatrixXd F = oracles::random_matrix(rng, m, servo.rq());

    CHECK((sslg_apply_model(plant, servo, F) - D * F).norm() <
          1e-12 * (1.0 + F.norm()));
    const FrequencyData fd = analytic_frequency_data(plant, exo);
    CHECK((sslg_apply_data(fd, spectral_projectors(exo), F) - D * F).norm() <
          1e-12 * (1.0 + F.norm()));
}

TEST_CASE("oracle equivalence of the data and model routes") {
    oracles::Rng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = rng.uniform_int(2, 8);
        const int r = rng.uniform_int(1, 3);
        const int m = rng.uniform_int(r, 3);
        const int ell = rng.uniform_int(0, 3);
        const RandomCase tc = random_case(rng, n, r, m, ell);
        const Eigen::MatrixXd F = oracles::random_matrix(rng, m, tc.servo.rq());
        const Eigen::MatrixXd Ld = sslg_apply_data(tc.fd, tc.spectral, F);
        const Eigen::MatrixXd Lm = sslg_apply_model(tc.plant, tc.servo, F);
        CHECK((Ld - Lm).norm() <= 1e-8 * (1.0 + F.norm()));
    }
}

TEST_CASE("both routes are linear in F") {
    oracles::Rng rng(77);
    const RandomCase tc = random_case(rng, 6, 2, 3, 2);
    const Eigen::MatrixXd F1 = oracles::random_matrix(rng, 3, tc.servo.rq());
    const Eigen::MatrixXd F2 = oracles::random_matrix(rng, 3, tc.servo.rq());
    const double a = 0.37, b = -1.91;
    for (auto apply : {+[](const RandomCase& c, const Eigen::MatrixXd& F) {
                           return sslg_apply_data(c.fd, c.spectral, F);
                       },
                       +[](const RandomCase& c, const Eigen::MatrixXd& F) {
                           return sslg_apply_model(c.plant, c.servo, F);
                       }}) {
        const Eigen::MatrixXd lhs = apply(tc, a * F1 + b * F2);
        const Eigen::MatrixXd rhs = a * apply(tc, F1) + b * apply(tc, F2);
        CHECK((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }
}

TEST_CASE("build_M dimensions and the vectorization identity") {
    FrequencyData fd = constant_only(2.0);
    const OperatorMatrix M0 = build_M(fd, spectral_projectors(build_exosystem({})));
    CHECK(M0.M.rows() == 1);
    CHECK(M0.M.cols() == 1);
    CHECK(M0.M(0, 0) == doctest::Approx(2.0));

    oracles::Rng rng(8);
    {
        const RandomCase tc = random_case(rng, 4, 1, 1, 1);
        const OperatorMatrix M = build_M(tc.fd, tc.spectral);
        CHECK(M.M.rows() == 3);
        CHECK(M.M.cols() == 3);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::MatrixXd F = oracles::random_matrix(rng, 1, 3);
            const Eigen::MatrixXd L = sslg_apply_data(tc.fd, tc.spectral, F);
            const Eigen::VectorXd lhs =
                M.M * Eigen::Map<const Eigen::VectorXd>(F.data(), F.size());
            const Eigen::VectorXd rhs =
                Eigen::Map<const Eigen::VectorXd>(L.data(), L.size());
            CHECK((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        }
    }
    {
        const RandomCase tc = random_case(rng, 5, 2, 3, 2);
        const OperatorMatrix M = build_M(tc.fd, tc.spectral);
        CHECK(M.M.rows() == 20);
        CHECK(M.M.cols() == 30);
        const Eigen::MatrixXd F = oracles::random_matrix(rng, 3, 10);
        const Eigen::MatrixXd L = sslg_apply_data(tc.fd, tc.spectral, F);
        const Eigen::VectorXd lhs =
            M.M * Eigen::Map<const Eigen::VectorXd>(F.data(), F.size());
        CHECK((lhs - Eigen::Map<const Eigen::VectorXd>(L.data(), L.size())).norm() <
              1e-12 * (1.0 + L.norm()));
    }
}

TEST_CASE("solve_gain: scalar, square-unique and minimum-norm fat cases") {
    FrequencyData fd = constant_only(2.0);
    const OperatorMatrix M0 = build_M(fd, spectral_projectors(build_exosystem({})));
    Eigen::MatrixXd Z(1, 1);
    Z << 6.0;
    CHECK(solve_gain(M0, Z)(0, 0) == doctest::Approx(3.0));

    oracles::Rng rng(31);
    {
        // Square: the solution is unique and the residual is tiny.
        const RandomCase tc = random_case(rng, 6, 2, 2, 1);
        const OperatorMatrix M = build_M(tc.fd, tc.spectral);
        CHECK(M.sigma_min > 0.0);
        const Eigen::MatrixXd Z2 = oracles::random_matrix(rng, 2, tc.servo.rq());
        const Eigen::MatrixXd F = solve_gain(M, Z2);
        const Eigen::VectorXd res =
            M.M * Eigen::Map<const Eigen::VectorXd>(F.data(), F.size()) -
            Eigen::Map<const Eigen::VectorXd>(Z2.data(), Z2.size());
        CHECK(res.norm() <= 1e-8 * (1.0 + Z2.norm()));
    }
    {
        // Fat (m > r): minimum Frobenius norm among sampled solutions.
        const RandomCase tc = random_case(rng, 5, 1, 2, 1);
        const OperatorMatrix M = build_M(tc.fd, tc.spectral);
        const Eigen::MatrixXd Z1 = oracles::random_matrix(rng, 1, tc.servo.rq());
        const Eigen::MatrixXd F = solve_gain(M, Z1);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M.M, Eigen::ComputeFullV);
        const int rows = static_cast<int>(M.M.rows());
        const Eigen::MatrixXd nullspace =
            svd.matrixV().rightCols(M.M.cols() - rows);
        const Eigen::VectorXd f0 =
            Eigen::Map<const Eigen::VectorXd>(F.data(), F.size());
        for (int s = 0; s < 100; ++s) {
            const Eigen::VectorXd w =
                oracles::random_matrix(rng, static_cast<int>(nullspace.cols()), 1);
            const Eigen::VectorXd alt = f0 + nullspace * w;
            const Eigen::VectorXd res =
                M.M * alt - Eigen::Map<const Eigen::VectorXd>(Z1.data(), Z1.size());
            REQUIRE(res.norm() <= 1e-7 * (1.0 + Z1.norm()));
            CHECK(alt.norm() >= f0.norm() * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("solve_gain round-trips through sslg_apply_data") {
    oracles::Rng rng(55);
    const RandomCase tc = random_case(rng, 7, 2, 3, 2);
    const OperatorMatrix M = build_M(tc.fd, tc.spectral);
    const Eigen::MatrixXd Z = oracles::random_matrix(rng, 2, tc.servo.rq());
    const Eigen::MatrixXd F = solve_gain(M, Z);
    CHECK((sslg_apply_data(tc.fd, tc.spectral, F) - Z).norm() <=
          1e-8 * (1.0 + Z.norm()));
}

TEST_CASE("solve_gain rejects rank-deficient operators with diagnostics") {
    FrequencyData fd = constant_only(0.0);
    const OperatorMatrix M = build_M(fd, spectral_projectors(build_exosystem({})));
    Eigen::MatrixXd Z(1, 1);
    Z << 1.0;
    CHECK_THROWS_AS(solve_gain(M, Z), NonResonanceViolated);
    try {
        solve_gain(M, Z);
    } catch (const NonResonanceViolated& ex) {
        CHECK(ex.singular_values.size() == 1);
    }
}

TEST_CASE("check_nonresonance pass/fail reporting") {
    FrequencyData fd;
    fd.P0 = Eigen::MatrixXd::Identity(2, 2);
    FrequencySample s;
    s.omega = 1.0;
    s.response = Eigen::MatrixXcd::Identity(2, 2) * std::complex<double>(0.4, 1.0);
    fd.samples.push_back(s);
    CHECK(check_nonresonance(fd).pass);

    fd.samples[0].response = Eigen::MatrixXcd::Zero(2, 2);
    const auto report = check_nonresonance(fd);
    CHECK_FALSE(report.pass);
    CHECK(report.entries[0].full);
    CHECK_FALSE(report.entries[1].full);
    CHECK(report.entries[1].rank == 0);
}

TEST_CASE("a transmission zero at j w1 fails non-resonance exactly there") {
    const double w1 = 0.5;
    const Exosystem exo = build_exosystem({w1, 2.0});
    {
        const StateSpaceModel plant = zero_pair_plant(w1);
        const FrequencyData fd = analytic_frequency_data(plant, exo);
        const auto report = check_nonresonance(fd);
        CHECK_FALSE(report.pass);
        CHECK(report.entries[0].full);        // P(0) fine
        CHECK_FALSE(report.entries[1].full);  // zero sits exactly at j w1
        CHECK(report.entries[2].full);
    }
    {
        // Perturbing the zero off j w1 restores full rank everywhere.
        const StateSpaceModel plant = zero_pair_plant(1.2 * w1);
        const FrequencyData fd = analytic_frequency_data(plant, exo);
        CHECK(check_nonresonance(fd).pass);
    }
}

TEST_CASE("surjectivity of M is equivalent to the rank condition") {
    const double w1 = 0.5;
    const Exosystem exo = build_exosystem({w1});
    const SpectralData spec = spectral_projectors(exo);
    {
        const FrequencyData fd =
            analytic_frequency_data(zero_pair_plant(w1), exo);
        REQUIRE_FALSE(check_nonresonance(fd).pass);
        const OperatorMatrix M = build_M(fd, spec);
        CHECK(M.sigma_min <= 1e-10 * M.sigma_max);
    }
    {
        const FrequencyData fd =
            analytic_frequency_data(zero_pair_plant(1.3 * w1), exo);
        REQUIRE(check_nonresonance(fd).pass);
        const OperatorMatrix M = build_M(fd, spec);
        CHECK(M.sigma_min > 1e-10 * M.sigma_max);
    }
}

TEST_CASE("frequency data JSON round-trip is exact for finite doubles") {
    FrequencyData fd;
    fd.provenance = "identified";
    fd.P0.resize(2, 3);
    fd.P0 << 1.0 / 3.0, -2.718281828459045, 1e-308, 6.02214076e23, 0.0, -0.1;
    FrequencySample s;
    s.omega = 0.30000000000000004;
    s.response.resize(2, 3);
    s.response.setZero();
    s.response(0, 0) = {1.0 / 7.0, -3.0 / 11.0};
    s.response(1, 2) = {1.7976931348623157e308, 5e-324};
    fd.samples.push_back(s);

    const FrequencyData back = frequency_data_from_json(frequency_data_to_json(fd));
    CHECK(back.provenance == fd.provenance);
    CHECK(back.P0 == fd.P0);
    REQUIRE(back.samples.size() == 1);
    CHECK(back.samples[0].omega == fd.samples[0].omega);
    CHECK(back.samples[0].response == fd.samples[0].response);
}

TEST_CASE("frequency data validation against the exosystem") {
    const Exosystem exo = build_exosystem({1.0, 2.0});
    FrequencyData fd;
    fd.P0 = Eigen::MatrixXd::Identity(1, 1);
    CHECK_THROWS_AS(fd.validate_against(exo), ConfigError);
    FrequencySample s1{1.0, Eigen::MatrixXcd::Identity(1, 1)};
    FrequencySample s2{2.5, Eigen::MatrixXcd::Identity(1, 1)};
    fd.samples = {s1, s2};
    CHECK_THROWS_AS(fd.validate_against(exo), ConfigError);
    fd.samples[1].omega = 2.0;
    CHECK_NOTHROW(fd.validate_against(exo));
}
