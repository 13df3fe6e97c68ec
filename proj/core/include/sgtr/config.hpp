#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgtr/lti.hpp"

namespace sgtr {

/// Inline plant matrices as they appear in a config file.
struct PlantMatrices {
    Eigen::MatrixXd A, B, C, D;
    Eigen::MatrixXd Bd, Dd; // empty when absent

    bool operator==(const PlantMatrices& other) const;
};

struct HarmonicSpec {
    double omega = 0.0;
    std::vector<double> cos_amp;
    std::vector<double> sin_amp;

    bool operator==(const HarmonicSpec&) const = default;
};

struct DisturbanceSpec {
    std::vector<double> constant;
    std::vector<HarmonicSpec> harmonics;

    bool operator==(const DisturbanceSpec&) const = default;
};

struct EpsGrid {
    double start = 0.0;
    double stop = 0.0;
    int points = 0;

    bool operator==(const EpsGrid&) const = default;
    std::vector<double> values() const; // log-spaced
};

struct ProbeSpec {
    std::optional<double> settle_time;
    std::optional<double> record_time;
    std::optional<double> dt;
    std::optional<double> amplitude;

    bool operator==(const ProbeSpec&) const = default;
};

/// Everything a run needs, loadable from a JSON config file.
struct ProjectConfig {
    std::string plant_preset;           // e.g. "four-tank"; empty when inline
    std::optional<PlantMatrices> plant; // inline matrices
    std::vector<double> frequencies;    // exosystem
    DisturbanceSpec disturbance;
    std::vector<double> k;              // pole constants; empty -> default 1s
    double eps = 1e-3;
    std::optional<EpsGrid> eps_grid;
    std::vector<double> davison_eps;
    double horizon = 100.0;
    double dt = 0.0;                    // 0 -> default step
    std::string output_dir = "out";
    std::optional<ProbeSpec> identification;
    std::string description;

    bool operator==(const ProjectConfig& other) const;
};

ProjectConfig config_from_json(const std::string& text);
std::string config_to_json(const ProjectConfig& cfg);
ProjectConfig load_config(const std::string& path);
void save_config(const ProjectConfig& cfg, const std::string& path);

/// Resolves the preset name or inline matrices into a validated stable plant.
/// Preset files are searched in $SGTR_PRESET_DIR, then the built-in presets
/// directory.
StateSpaceModel resolve_plant(const ProjectConfig& cfg);

/// Builds the exogenous signal, validated against the plant's nd channels.
ExogenousSignal resolve_disturbance(const ProjectConfig& cfg, int nd);

/// Formats a double with 12 significant digits (CSV convention).
std::string csv_number(double v);

} // namespace sgtr
