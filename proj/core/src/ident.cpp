#include "sgtr/ident.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace sgtr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_finite(const Eigen::VectorXd& e, double t) {
    if (!e.allFinite())
        throw NotStableError("plant not stable: probe response non-finite at "
                             "t = " +
                             std::to_string(t));
}

} // namespace

void ProbeConfig::validate() const {
    if (!(settle_time > 0.0) || !(record_time > 0.0) || !(dt > 0.0) ||
        !(amplitude > 0.0))
        throw ConfigError("probe config: settle_time, record_time, dt and "
                          "amplitude must all be positive");
}

ProbeConfig ProbeConfig::step_defaults(const StateSpaceModel& plant) {
    plant.require_stable("probe defaults");
    ProbeConfig cfg;
    cfg.settle_time = 20.0 / std::abs(plant.alpha());
    cfg.dt = cfg.settle_time / 1000.0;
    cfg.record_time = 100.0 * cfg.dt;
    cfg.amplitude = 1.0;
    return cfg;
}

ProbeConfig ProbeConfig::sine_defaults(const StateSpaceModel& plant,
                                       double omega) {
    plant.require_stable("probe defaults");
    if (!(omega > 0.0)) throw ConfigError("probe defaults: omega must be positive");
    ProbeConfig cfg;
    cfg.settle_time = 20.0 / std::abs(plant.alpha());
    const double period = kTwoPi / omega;
    cfg.dt = period / 128.0;
    cfg.record_time = std::max(8.0 * period, 100.0 * cfg.dt);
    cfg.amplitude = 1.0;
    return cfg;
}

Eigen::MatrixXd estimate_dc_gain(const StateSpaceModel& plant,
                                 const ProbeConfig& cfg) {
    plant.require_stable("estimate_dc_gain");
    cfg.validate();
    const int n = plant.n();
    const int m = plant.m();
    const int r = plant.r();

    const auto total_steps = static_cast<Eigen::Index>(
        std::ceil((cfg.settle_time + cfg.record_time) / cfg.dt));
    const auto window_start = static_cast<Eigen::Index>(
        std::ceil((cfg.settle_time + 0.9 * cfg.record_time) / cfg.dt));

    Eigen::MatrixXd estimate(r, m);
    for (int j = 0; j < m; ++j) {
        // Constant input is exact under zero-order hold.
        Eigen::MatrixXd Maug = Eigen::MatrixXd::Zero(n + 1, n + 1);
        Maug.topLeftCorner(n, n) = plant.A;
        Maug.topRightCorner(n, 1) = plant.B.col(j);
        const Eigen::MatrixXd E = (Maug * cfg.dt).exp();
        const Eigen::MatrixXd Ad = E.topLeftCorner(n, n);
        const Eigen::VectorXd bd = E.topRightCorner(n, 1);

        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(r);
        Eigen::Index samples = 0;
        for (Eigen::Index i = 0; i <= total_steps; ++i) {
            const Eigen::VectorXd e =
                plant.C * x + plant.D.col(j) * cfg.amplitude;
            check_finite(e, static_cast<double>(i) * cfg.dt);
            if (i >= window_start) {
                mean += e;
                ++samples;
            }
            x = Ad * x + bd * cfg.amplitude;
        }
        estimate.col(j) = mean / (static_cast<double>(samples) * cfg.amplitude);
    }
    return estimate;
}

Eigen::MatrixXcd estimate_freq_response(const StateSpaceModel& plant,
                                        double omega, const ProbeConfig& cfg) {
    plant.require_stable("estimate_freq_response");
    cfg.validate();
    if (!(omega > 0.0))
        throw ConfigError("estimate_freq_response: omega must be positive");
    const double period = kTwoPi / omega;
    const auto whole_periods = std::floor(cfg.record_time / period + 1e-9);
    if (whole_periods < 4.0)
        throw ConfigError("estimate_freq_response: record_time must span at "
                          "least 4 periods of the probe frequency");

    const int n = plant.n();
    const int m = plant.m();
    const int r = plant.r();
    // Retain whole periods only, so the sin/cos basis stays unbiased.
    const double retain_end = cfg.settle_time + whole_periods * period;
    const auto first = static_cast<Eigen::Index>(
        std::ceil(cfg.settle_time / cfg.dt - 1e-9));
    const auto last =
        static_cast<Eigen::Index>(std::floor(retain_end / cfg.dt + 1e-9));

    Eigen::MatrixXcd estimate(r, m);
    for (int j = 0; j < m; ++j) {
        // The probe input amplitude*sin(w t) is generated exactly by a
        // two-state oscillator appended to the plant, so sampling is exact.
        Eigen::MatrixXd Maug = Eigen::MatrixXd::Zero(n + 2, n + 2);
        Maug.topLeftCorner(n, n) = plant.A;
        Maug.block(0, n, n, 1) = plant.B.col(j);
        Maug(n, n + 1) = omega;
        Maug(n + 1, n) = -omega;
        const Eigen::MatrixXd E = (Maug * cfg.dt).exp();

        Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 2);
        x(n + 1) = cfg.amplitude; // s = (sin, cos) * amplitude

        double ss = 0.0, sc = 0.0, cc = 0.0;
        Eigen::VectorXd se = Eigen::VectorXd::Zero(r);
        Eigen::VectorXd ce = Eigen::VectorXd::Zero(r);
        for (Eigen::Index i = 0; i <= last; ++i) {
            const double t = static_cast<double>(i) * cfg.dt;
            if (i >= first) {
                const Eigen::VectorXd e =
                    plant.C * x.head(n) + plant.D.col(j) * x(n);
                check_finite(e, t);
                const double s = std::sin(omega * t);
                const double c = std::cos(omega * t);
                ss += s * s;
                sc += s * c;
                cc += c * c;
                se += s * e;
                ce += c * e;
            }
            x = E * x;
        }

        // Least-squares fit e_i(t) ~ a sin(w t) + b cos(w t), channel-wise.
        const double det = ss * cc - sc * sc;
        if (!(std::abs(det) > 0.0))
            throw ConfigError("estimate_freq_response: degenerate demodulation "
                              "basis; increase record_time or reduce dt");
        for (int i = 0; i < r; ++i) {
            const double a = (cc * se(i) - sc * ce(i)) / det;
            const double b = (ss * ce(i) - sc * se(i)) / det;
            estimate(i, j) = std::complex<double>(a, b) / cfg.amplitude;
        }
    }
    return estimate;
}

FrequencyData identify_frequency_data(const StateSpaceModel& plant,
                                      const Exosystem& exo) {
    FrequencyData fd;
    fd.provenance = "identified";
    fd.P0 = estimate_dc_gain(plant, ProbeConfig::step_defaults(plant));
    for (double w : exo.frequencies) {
        FrequencySample s;
        s.omega = w;
        s.response =
            estimate_freq_response(plant, w, ProbeConfig::sine_defaults(plant, w));
        fd.samples.push_back(std::move(s));
    }
    fd.validate_against(exo);
    return fd;
}

FrequencyData identify_frequency_data(const StateSpaceModel& plant,
                                      const Exosystem& exo,
                                      const ProbeConfig& cfg) {
    FrequencyData fd;
    fd.provenance = "identified";
    fd.P0 = estimate_dc_gain(plant, cfg);
    for (double w : exo.frequencies) {
        FrequencySample s;
        s.omega = w;
        s.response = estimate_freq_response(plant, w, cfg);
        fd.samples.push_back(std::move(s));
    }
    fd.validate_against(exo);
    return fd;
}

FrequencyData analytic_frequency_data(const StateSpaceModel& plant,
                                      const Exosystem& exo) {
    plant.require_stable("analytic_frequency_data");
    FrequencyData fd;
    fd.provenance = "analytic";
    const Eigen::MatrixXcd P0c = eval_transfer(plant, {0.0, 0.0});
    fd.P0 = P0c.real();
    for (double w : exo.frequencies) {
        FrequencySample s;
        s.omega = w;
        s.response = eval_transfer(plant, {0.0, w});
        fd.samples.push_back(std::move(s));
    }
    fd.validate_against(exo);
    return fd;
}

} // namespace sgtr
