#pragma once

#include <Eigen/Dense>

#include "sgtr/lti.hpp"
#include "sgtr/servo.hpp"
#include "sgtr/sslg.hpp"

namespace sgtr {

/// Probe experiment parameters. All durations in seconds, all positive.
struct ProbeConfig {
    double settle_time = 0.0; // transient discard before the record starts
    double record_time = 0.0; // retained record length
    double dt = 0.0;          // sample step
    double amplitude = 1.0;   // probe input amplitude

    void validate() const;

    /// Defaults for a step probe: settle = 20/|alpha(A)|, record = 100 dt.
    static ProbeConfig step_defaults(const StateSpaceModel& plant);
    /// Defaults for a sine probe at omega: settle = 20/|alpha(A)|,
    /// dt = period/128, record = max(8 periods, 100 dt).
    static ProbeConfig sine_defaults(const StateSpaceModel& plant, double omega);
};

/// DC gain by step probing: unit step on each input channel in turn, error
/// averaged over the final 10% of the record.
Eigen::MatrixXd estimate_dc_gain(const StateSpaceModel& plant,
                                 const ProbeConfig& cfg);

/// Frequency response at omega by sine probing: drive each input with
/// amplitude*sin(w t), discard the settle window, truncate to whole periods,
/// and fit each error channel to a sin(w t) + b cos(w t) by least squares.
/// The estimate is (a + j b)/amplitude per entry.
Eigen::MatrixXcd estimate_freq_response(const StateSpaceModel& plant,
                                        double omega, const ProbeConfig& cfg);

/// Runs the full probe battery (one step probe plus one sine probe per
/// exosystem frequency) with per-probe default configs.
FrequencyData identify_frequency_data(const StateSpaceModel& plant,
                                      const Exosystem& exo);
/// Same with one explicit config applied to every probe.
FrequencyData identify_frequency_data(const StateSpaceModel& plant,
                                      const Exosystem& exo,
                                      const ProbeConfig& cfg);

/// Bypasses probing: samples the analytic transfer matrix directly and labels
/// the result with analytic provenance.
FrequencyData analytic_frequency_data(const StateSpaceModel& plant,
                                      const Exosystem& exo);

} // namespace sgtr
