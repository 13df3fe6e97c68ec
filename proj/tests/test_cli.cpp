#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "sgtr/pipeline.hpp"

using namespace sgtr;
namespace fs = std::filesystem;

namespace {

const std::string kPreset = std::string(SGTR_CONFIG_DIR) + "/four_tank.json";

std::string fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sgtr_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(SGTR_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

ProjectConfig toy_config(double p0_gain, double k0, double eps) {
    ProjectConfig cfg;
    PlantMatrices pm;
    pm.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
    pm.B = Eigen::MatrixXd::Constant(1, 1, p0_gain);
    pm.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
    pm.D = Eigen::MatrixXd::Zero(1, 1);
    pm.Bd = Eigen::MatrixXd::Constant(1, 1, 1.0);
    pm.Dd = Eigen::MatrixXd::Zero(1, 1);
    cfg.plant = pm;
    cfg.frequencies = {};
    cfg.disturbance.constant = {1.0};
    cfg.k = {k0};
    cfg.eps = eps;
    cfg.horizon = 200.0;
    cfg.dt = 0.01;
    return cfg;
}

} // namespace

TEST_CASE("config parse -> serialize -> parse is the identity") {
    const ProjectConfig cfg = load_config(kPreset);
    const ProjectConfig again = config_from_json(config_to_json(cfg));
    CHECK(cfg == again);

    // Preset-by-name configs keep the name through the round trip.
    ProjectConfig named;
    named.plant_preset = "four-tank";
    named.frequencies = {0.01, 0.1};
    named.davison_eps = {0.0025, 0.0025, 0.003};
    const ProjectConfig named_again = config_from_json(config_to_json(named));
    CHECK(named == named_again);
}

TEST_CASE("plant preset resolution honors SGTR_PRESET_DIR") {
    ProjectConfig named;
    named.plant_preset = "four-tank";
    setenv("SGTR_PRESET_DIR", SGTR_CONFIG_DIR, 1);
    const StateSpaceModel plant = resolve_plant(named);
    CHECK(plant.n() == 4);
    CHECK(plant.is_stable());
    unsetenv("SGTR_PRESET_DIR");

    ProjectConfig missing;
    missing.plant_preset = "no-such-preset";
    CHECK_THROWS_AS(resolve_plant(missing), ConfigError);
}

TEST_CASE("design run on the four-tank preset certifies the benchmark eps") {
    ProjectConfig cfg = load_config(kPreset);
    const auto run = run_design(cfg, fresh_dir("design"), /*from_model=*/true);
    CHECK(run.certificate.pass);
    CHECK(run.certificate.c >= 1e-6);
    CHECK(run.eps_star > 0.0002);
    CHECK(run.alpha_at_eps < 0.0);
}

TEST_CASE("constant-only toy: certificate constant approaches k0") {
    ProjectConfig cfg = toy_config(1.0, 3.0, 1e-3);
    const auto run = run_design(cfg, fresh_dir("toy"), true);
    CHECK(run.certificate.pass);
    CHECK(run.certificate.c == doctest::Approx(3.0).epsilon(0.01));
    CHECK(run.F_at_eps(0, 0) == doctest::Approx(3.0 * 1e-3).epsilon(1e-6));
}

TEST_CASE("sweep rows flip from stable to unstable once past eps*") {
    ProjectConfig cfg = load_config(kPreset);
    cfg.horizon = 2000.0;
    cfg.eps_grid = EpsGrid{1e-4, 1e-2, 7};
    const auto rows = run_sweep(cfg, fresh_dir("sweep"), true);
    REQUIRE(rows.size() == 7);
    int flips = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].stable != rows[i - 1].stable) ++flips;
    CHECK(flips == 1);
    CHECK(rows.front().stable);
    CHECK_FALSE(rows.back().stable);
    for (const auto& row : rows)
        if (row.stable) CHECK(row.overshoot > 0.0);
}

TEST_CASE("single-point sweep agrees with the design run") {
    ProjectConfig cfg = load_config(kPreset);
    cfg.horizon = 1000.0;
    cfg.eps_grid = EpsGrid{cfg.eps, cfg.eps, 1};
    const auto rows = run_sweep(cfg, fresh_dir("sweep_one"), true);
    const auto design = run_design(cfg, fresh_dir("design_one"), true);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].alpha == doctest::Approx(design.alpha_at_eps).epsilon(1e-12));

    cfg.eps_grid = std::nullopt;
    CHECK_THROWS_AS(run_sweep(cfg, fresh_dir("sweep_none"), true), ConfigError);

    cfg.eps_grid = EpsGrid{1e-4, 1e-3, 0};
    CHECK_THROWS_AS(run_sweep(cfg, fresh_dir("sweep_zero"), true), ConfigError);
}

TEST_CASE("compare reproduces the ordinal four-tank claims") {
    ProjectConfig cfg = load_config(kPreset);
    const auto run = run_compare(cfg, fresh_dir("compare"));
    CHECK(run.sgtr_dominant.real() < 0.0);
    CHECK(run.davison_dominant.real() < 0.0);
    CHECK(run.sgtr_dominant.real() < run.davison_dominant.real());
    CHECK(run.davison_eps1_upper > 0.0);

    const auto regulated = [](const Trajectory& t) {
        Eigen::VectorXd norms = t.error.colwise().norm().transpose();
        return norms(norms.size() - 1) <= 1e-4 * norms.maxCoeff();
    };
    CHECK(regulated(run.sgtr_trajectory));
    CHECK(regulated(run.davison_trajectory));
}

TEST_CASE("simulate with a zero signal produces identically zero error rows") {
    ProjectConfig cfg = load_config(kPreset);
    cfg.disturbance.constant = {0.0};
    cfg.disturbance.harmonics.clear();
    cfg.horizon = 50.0;
    const auto traj = run_simulate(cfg, fresh_dir("simzero"), true);
    CHECK(traj.error.cwiseAbs().maxCoeff() == 0.0);

    cfg.horizon = 0.001; // below dt
    CHECK_THROWS_AS(run_simulate(cfg, fresh_dir("simbad"), true), ConfigError);
}

TEST_CASE("ident run writes loadable frequency data in both modes") {
    ProjectConfig cfg = load_config(kPreset);
    const std::string dir = fresh_dir("ident");
    const FrequencyData fd = run_ident(cfg, dir, /*from_model=*/false);
    CHECK(fd.provenance == "identified");
    const FrequencyData loaded = load_frequency_data(dir + "/frequency_data.json");
    CHECK(loaded.P0 == fd.P0);
    REQUIRE(loaded.samples.size() == fd.samples.size());
    for (std::size_t i = 0; i < fd.samples.size(); ++i)
        CHECK(loaded.samples[i].response == fd.samples[i].response);

    const FrequencyData analytic = run_ident(cfg, fresh_dir("ident2"), true);
    CHECK(analytic.provenance == "analytic");
}

TEST_CASE("identical configs give byte-identical CSV outputs") {
    ProjectConfig cfg = load_config(kPreset);
    cfg.horizon = 300.0;
    const std::string dir_a = fresh_dir("det_a");
    const std::string dir_b = fresh_dir("det_b");
    run_simulate(cfg, dir_a, true);
    run_simulate(cfg, dir_b, true);
    CHECK(slurp(dir_a + "/trajectory.csv") == slurp(dir_b + "/trajectory.csv"));

    run_design(cfg, dir_a, true);
    run_design(cfg, dir_b, true);
    CHECK(slurp(dir_a + "/certificate.csv") == slurp(dir_b + "/certificate.csv"));
    CHECK(slurp(dir_a + "/design.json") == slurp(dir_b + "/design.json"));
}

TEST_CASE("CLI binary: exit codes follow the documented contract") {
    const std::string dir = fresh_dir("bin");

    // Success path, and byte-identical reruns through the real binary.
    ProjectConfig cfg = load_config(kPreset);
    cfg.horizon = 300.0;
    const std::string short_cfg = dir + "/short.json";
    save_config(cfg, short_cfg);
    CHECK(run_cli("simulate --config " + short_cfg + " --out " + dir +
                  "/r1 --from-model") == 0);
    CHECK(run_cli("simulate --config " + short_cfg + " --out " + dir +
                  "/r2 --from-model") == 0);
    CHECK(slurp(dir + "/r1/trajectory.csv") == slurp(dir + "/r2/trajectory.csv"));

    // Config error: missing file.
    CHECK(run_cli("design --config " + dir + "/nope.json") == 2);

    // Non-resonance: a plant whose error channel is identically zero.
    ProjectConfig zero = toy_config(1.0, 1.0, 1e-3);
    zero.plant->C.setZero();
    const std::string zero_cfg = dir + "/zero.json";
    save_config(zero, zero_cfg);
    CHECK(run_cli("design --config " + zero_cfg + " --out " + dir +
                  "/zr --from-model") == 3);

    // Instability at the requested eps.
    CHECK(run_cli("design --config " + short_cfg + " --out " + dir +
                  "/un --from-model --eps 0.05") == 4);
}
