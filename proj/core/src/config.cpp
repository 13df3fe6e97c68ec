#include "sgtr/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sgtr {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw ConfigError(std::string(what) + ": expected a nested numeric array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError(std::string(what) + ": ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& cell = row[static_cast<std::size_t>(c)];
            if (!cell.is_number())
                throw ConfigError(std::string(what) + ": non-numeric entry");
            M(i, c) = cell.get<double>();
        }
    }
    return M;
}

std::vector<double> doubles_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number())
            throw ConfigError(std::string(what) + ": non-numeric entry");
        out.push_back(v.get<double>());
    }
    return out;
}

Eigen::VectorXd vector_from(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<Eigen::Index>(v.size()));
}

std::string preset_file_name(const std::string& preset) {
    std::string name = preset;
    for (char& c : name)
        if (c == '-') c = '_';
    return name + ".json";
}

std::string find_preset_path(const std::string& preset) {
    const std::string file = preset_file_name(preset);
    std::vector<std::string> candidates;
    if (const char* env = std::getenv("SGTR_PRESET_DIR"))
        candidates.push_back(std::string(env) + "/" + file);
#ifdef SGTR_DEFAULT_PRESET_DIR
    candidates.push_back(std::string(SGTR_DEFAULT_PRESET_DIR) + "/" + file);
#endif
    candidates.push_back("configs/" + file);
    for (const auto& path : candidates)
        if (std::filesystem::exists(path)) return path;
    throw ConfigError("preset '" + preset +
                      "' not found (set SGTR_PRESET_DIR to the presets "
                      "directory)");
}

} // namespace

bool PlantMatrices::operator==(const PlantMatrices& other) const {
    const auto eq = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    return eq(A, other.A) && eq(B, other.B) && eq(C, other.C) && eq(D, other.D) &&
           eq(Bd, other.Bd) && eq(Dd, other.Dd);
}

bool ProjectConfig::operator==(const ProjectConfig& other) const {
    return plant_preset == other.plant_preset && plant == other.plant &&
           frequencies == other.frequencies && disturbance == other.disturbance &&
           k == other.k && eps == other.eps && eps_grid == other.eps_grid &&
           davison_eps == other.davison_eps && horizon == other.horizon &&
           dt == other.dt && output_dir == other.output_dir &&
           identification == other.identification &&
           description == other.description;
}

std::vector<double> EpsGrid::values() const {
    if (points < 1) throw ConfigError("eps grid must contain at least one point");
    if (!(start > 0.0) || !(stop >= start))
        throw ConfigError("eps grid requires 0 < start <= stop");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    if (points == 1) {
        out.push_back(start);
        return out;
    }
    const double la = std::log(start);
    const double lb = std::log(stop);
    for (int i = 0; i < points; ++i)
        out.push_back(std::exp(la + (lb - la) * i / (points - 1)));
    return out;
}

ProjectConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("config: invalid JSON: ") + ex.what());
    }

    ProjectConfig cfg;
    cfg.description = j.value("description", std::string());

    if (!j.contains("plant")) throw ConfigError("config: missing 'plant'");
    const auto& plant = j.at("plant");
    if (plant.is_string()) {
        cfg.plant_preset = plant.get<std::string>();
    } else if (plant.is_object()) {
        PlantMatrices pm;
        pm.A = matrix_from_json(plant.at("A"), "plant A");
        pm.B = matrix_from_json(plant.at("B"), "plant B");
        pm.C = matrix_from_json(plant.at("C"), "plant C");
        pm.D = matrix_from_json(plant.at("D"), "plant D");
        if (plant.contains("Bd")) pm.Bd = matrix_from_json(plant.at("Bd"), "plant Bd");
        if (plant.contains("Dd")) pm.Dd = matrix_from_json(plant.at("Dd"), "plant Dd");
        cfg.plant = std::move(pm);
    } else {
        throw ConfigError("config: 'plant' must be a preset name or a matrix "
                          "object");
    }

    if (j.contains("exosystem"))
        cfg.frequencies =
            doubles_from_json(j.at("exosystem").at("frequencies"),
                              "exosystem frequencies");

    if (j.contains("disturbance")) {
        const auto& d = j.at("disturbance");
        if (d.contains("constant"))
            cfg.disturbance.constant =
                doubles_from_json(d.at("constant"), "disturbance constant");
        if (d.contains("harmonics")) {
            for (const auto& h : d.at("harmonics")) {
                HarmonicSpec hs;
                hs.omega = h.at("omega").get<double>();
                hs.cos_amp = doubles_from_json(h.at("cos"), "harmonic cos");
                hs.sin_amp = doubles_from_json(h.at("sin"), "harmonic sin");
                cfg.disturbance.harmonics.push_back(std::move(hs));
            }
        }
    }

    if (j.contains("design")) {
        const auto& d = j.at("design");
        if (d.contains("k")) cfg.k = doubles_from_json(d.at("k"), "design k");
        if (d.contains("eps")) cfg.eps = d.at("eps").get<double>();
        if (d.contains("eps_grid")) {
            EpsGrid grid;
            grid.start = d.at("eps_grid").at("start").get<double>();
            grid.stop = d.at("eps_grid").at("stop").get<double>();
            grid.points = d.at("eps_grid").at("points").get<int>();
            cfg.eps_grid = grid;
        }
    }

    if (j.contains("davison") && j.at("davison").contains("eps"))
        cfg.davison_eps =
            doubles_from_json(j.at("davison").at("eps"), "davison eps");

    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        if (s.contains("horizon")) cfg.horizon = s.at("horizon").get<double>();
        if (s.contains("dt")) cfg.dt = s.at("dt").get<double>();
    }

    if (j.contains("identification")) {
        const auto& id = j.at("identification");
        ProbeSpec ps;
        if (id.contains("settle_time"))
            ps.settle_time = id.at("settle_time").get<double>();
        if (id.contains("record_time"))
            ps.record_time = id.at("record_time").get<double>();
        if (id.contains("dt")) ps.dt = id.at("dt").get<double>();
        if (id.contains("amplitude")) ps.amplitude = id.at("amplitude").get<double>();
        cfg.identification = ps;
    }

    cfg.output_dir = j.value("output_dir", std::string("out"));
    return cfg;
}

std::string config_to_json(const ProjectConfig& cfg) {
    nlohmann::json j;
    if (!cfg.description.empty()) j["description"] = cfg.description;

    if (!cfg.plant_preset.empty()) {
        j["plant"] = cfg.plant_preset;
    } else if (cfg.plant) {
        nlohmann::json p;
        p["A"] = matrix_to_json(cfg.plant->A);
        p["B"] = matrix_to_json(cfg.plant->B);
        p["C"] = matrix_to_json(cfg.plant->C);
        p["D"] = matrix_to_json(cfg.plant->D);
        if (cfg.plant->Bd.size() > 0) p["Bd"] = matrix_to_json(cfg.plant->Bd);
        if (cfg.plant->Dd.size() > 0) p["Dd"] = matrix_to_json(cfg.plant->Dd);
        j["plant"] = std::move(p);
    }

    j["exosystem"]["frequencies"] = cfg.frequencies;

    nlohmann::json dist;
    dist["constant"] = cfg.disturbance.constant;
    nlohmann::json harmonics = nlohmann::json::array();
    for (const auto& h : cfg.disturbance.harmonics) {
        nlohmann::json hj;
        hj["omega"] = h.omega;
        hj["cos"] = h.cos_amp;
        hj["sin"] = h.sin_amp;
        harmonics.push_back(std::move(hj));
    }
    dist["harmonics"] = std::move(harmonics);
    j["disturbance"] = std::move(dist);

    nlohmann::json design;
    design["k"] = cfg.k;
    design["eps"] = cfg.eps;
    if (cfg.eps_grid) {
        design["eps_grid"]["start"] = cfg.eps_grid->start;
        design["eps_grid"]["stop"] = cfg.eps_grid->stop;
        design["eps_grid"]["points"] = cfg.eps_grid->points;
    }
    j["design"] = std::move(design);

    j["davison"]["eps"] = cfg.davison_eps;
    j["simulation"]["horizon"] = cfg.horizon;
    j["simulation"]["dt"] = cfg.dt;
    if (cfg.identification) {
        nlohmann::json id;
        if (cfg.identification->settle_time)
            id["settle_time"] = *cfg.identification->settle_time;
        if (cfg.identification->record_time)
            id["record_time"] = *cfg.identification->record_time;
        if (cfg.identification->dt) id["dt"] = *cfg.identification->dt;
        if (cfg.identification->amplitude)
            id["amplitude"] = *cfg.identification->amplitude;
        j["identification"] = std::move(id);
    }
    j["output_dir"] = cfg.output_dir;
    return j.dump(2) + "\n";
}

ProjectConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return config_from_json(buf.str());
}

void save_config(const ProjectConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << config_to_json(cfg);
}

StateSpaceModel resolve_plant(const ProjectConfig& cfg) {
    PlantMatrices pm;
    if (!cfg.plant_preset.empty()) {
        const ProjectConfig preset = load_config(find_preset_path(cfg.plant_preset));
        if (!preset.plant)
            throw ConfigError("preset '" + cfg.plant_preset +
                              "' does not define inline plant matrices");
        pm = *preset.plant;
    } else if (cfg.plant) {
        pm = *cfg.plant;
    } else {
        throw ConfigError("config defines no plant");
    }

    try {
        StateSpaceModel model =
            (pm.Bd.size() > 0 || pm.Dd.size() > 0)
                ? StateSpaceModel(pm.A, pm.B, pm.C, pm.D, pm.Bd, pm.Dd)
                : StateSpaceModel(pm.A, pm.B, pm.C, pm.D);
        if (!model.is_stable())
            throw ConfigError("plant registration rejected: spectral abscissa " +
                              std::to_string(model.alpha()) +
                              " is not below -1e-12");
        return model;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& ex) {
        throw ConfigError(std::string("plant registration failed: ") + ex.what());
    }
}

ExogenousSignal resolve_disturbance(const ProjectConfig& cfg, int nd) {
    Eigen::VectorXd constant = Eigen::VectorXd::Zero(nd);
    if (!cfg.disturbance.constant.empty()) {
        if (static_cast<int>(cfg.disturbance.constant.size()) != nd)
            throw ConfigError("disturbance constant has dimension " +
                              std::to_string(cfg.disturbance.constant.size()) +
                              "; plant expects " + std::to_string(nd));
        constant = vector_from(cfg.disturbance.constant);
    }
    std::vector<Harmonic> harmonics;
    for (const auto& h : cfg.disturbance.harmonics) {
        if (static_cast<int>(h.cos_amp.size()) != nd ||
            static_cast<int>(h.sin_amp.size()) != nd)
            throw ConfigError("disturbance harmonic amplitudes must have "
                              "dimension " +
                              std::to_string(nd));
        harmonics.push_back(
            Harmonic{h.omega, vector_from(h.cos_amp), vector_from(h.sin_amp)});
    }
    try {
        return ExogenousSignal(constant, std::move(harmonics));
    } catch (const Error& ex) {
        throw ConfigError(std::string("disturbance: ") + ex.what());
    }
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace sgtr
