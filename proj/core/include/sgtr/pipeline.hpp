#pragma once

#include <string>
#include <vector>

#include "sgtr/config.hpp"
#include "sgtr/davison.hpp"
#include "sgtr/lowgain.hpp"

namespace sgtr {

/// Outputs of the design pipeline (identify -> design -> certify).
struct DesignRun {
    SgtrDesign design;
    StabilityCertificate certificate;
    double eps_star = 0.0;
    Eigen::MatrixXd F_at_eps; // gain at the configured eps
    double alpha_at_eps = 0.0;
};

struct SweepRow {
    double eps = 0.0;
    double alpha = 0.0;
    bool stable = false;
    double settling_time = -1.0; // -1: not settled within horizon
    double rms_error = 0.0;
    double overshoot = 0.0; // peak ||e||
};

struct CompareRun {
    std::vector<std::complex<double>> sgtr_spectrum;
    std::vector<std::complex<double>> davison_spectrum;
    std::complex<double> sgtr_dominant;
    std::complex<double> davison_dominant;
    double davison_eps1_upper = 0.0;
    Trajectory sgtr_trajectory;
    Trajectory davison_trajectory;
};

/// design: frequency data (probed or analytic) -> gain design -> low-gain
/// certificate and eps* estimate. Writes design.json and certificate.csv.
DesignRun run_design(const ProjectConfig& cfg, const std::string& out_dir,
                     bool from_model);

/// sweep: per-eps closed-loop metrics over the configured grid; writes
/// sweep.csv in grid order, unstable rows flagged.
std::vector<SweepRow> run_sweep(const ProjectConfig& cfg,
                                const std::string& out_dir, bool from_model);

/// simulate: closed loop at the configured eps against the configured
/// disturbance; writes trajectory.csv.
Trajectory run_simulate(const ProjectConfig& cfg, const std::string& out_dir,
                        bool from_model);

/// compare: SGTR vs sequential Davison design on the same plant; writes
/// compare.json plus one trajectory CSV per controller.
CompareRun run_compare(const ProjectConfig& cfg, const std::string& out_dir);

/// ident: probe the plant and write frequency_data.json (or sample the
/// analytic transfer when from_model is set).
FrequencyData run_ident(const ProjectConfig& cfg, const std::string& out_dir,
                        bool from_model);

} // namespace sgtr
