#include "sgtr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sgtr/ident.hpp"

namespace sgtr {

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    const std::string path = dir + "/" + name;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    return os;
}

FrequencyData acquire_frequency_data(const StateSpaceModel& plant,
                                     const Exosystem& exo,
                                     const ProjectConfig& cfg, bool from_model) {
    if (from_model) return analytic_frequency_data(plant, exo);
    if (cfg.identification) {
        const auto& spec = *cfg.identification;
        if (!spec.settle_time || !spec.record_time || !spec.dt || !spec.amplitude)
            throw ConfigError("identification overrides must specify "
                              "settle_time, record_time, dt and amplitude");
        ProbeConfig pc;
        pc.settle_time = *spec.settle_time;
        pc.record_time = *spec.record_time;
        pc.dt = *spec.dt;
        pc.amplitude = *spec.amplitude;
        return identify_frequency_data(plant, exo, pc);
    }
    return identify_frequency_data(plant, exo);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json spectrum_to_json(const std::vector<std::complex<double>>& ev) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : ev) out.push_back({v.real(), v.imag()});
    return out;
}

std::vector<std::complex<double>> sorted_spectrum(const Eigen::MatrixXd& A) {
    auto ev = eigenvalues(A);
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

} // namespace

DesignRun run_design(const ProjectConfig& cfg, const std::string& out_dir,
                     bool from_model) {
    ensure_dir(out_dir);
    const StateSpaceModel plant = resolve_plant(cfg);
    const Exosystem exo = build_exosystem(cfg.frequencies);
    const FrequencyData fd = acquire_frequency_data(plant, exo, cfg, from_model);

    DesignRun run;
    run.design = design_sgtr(fd, exo, cfg.k);
    const auto loop_at = [&](double eps) {
        return assemble_closed_loop(plant, run.design.servo,
                                    gain_at(run.design, eps))
            .A;
    };
    run.certificate = certify_low_gain(loop_at, cfg.eps, 24);
    run.eps_star = estimate_eps_star(loop_at, cfg.eps);
    run.F_at_eps = gain_at(run.design, cfg.eps);
    run.alpha_at_eps = spectral_abscissa(loop_at(cfg.eps));

    // Lyapunov witnesses for the reduced family on the upper grid points,
    // where the eps-scaled residual tolerance is attainable in doubles.
    const Eigen::Index grid_n = run.certificate.eps_grid.size();
    for (Eigen::Index i = std::max<Eigen::Index>(0, grid_n - 8); i < grid_n; ++i) {
        const double eps = run.certificate.eps_grid(i);
        const Eigen::MatrixXd Ared =
            run.design.servo.Phi - run.design.servo.G * run.design.Z_at(eps);
        try {
            const auto lyap = lyapunov_certificate(Ared, eps);
            run.certificate.lyapunov.push_back(
                {eps, lyap.lambda_min, lyap.lambda_max, lyap.residual});
        } catch (const Error&) {
            // Witnesses are optional; certification rests on the abscissa grid.
        }
    }

    {
        auto os = open_out(out_dir, "certificate.csv");
        write_certificate_csv(run.certificate, run.eps_star, os);
    }
    {
        nlohmann::json j;
        j["k"] = run.design.k;
        j["eps"] = cfg.eps;
        j["frequency_data_provenance"] = fd.provenance;
        j["operator_matrix"] = {{"sigma_min", run.design.M.sigma_min},
                                {"sigma_max", run.design.M.sigma_max},
                                {"cond", run.design.M.cond()}};
        j["class_f_constant"] = run.design.class_f_constant;
        j["certificate"] = {{"pass", run.certificate.pass},
                            {"c", run.certificate.c}};
        nlohmann::json witnesses = nlohmann::json::array();
        for (const auto& w : run.certificate.lyapunov)
            witnesses.push_back({{"eps", w.eps},
                                 {"lambda_min", w.lambda_min},
                                 {"lambda_max", w.lambda_max},
                                 {"residual", w.residual}});
        j["lyapunov_witnesses"] = std::move(witnesses);
        j["eps_star"] = run.eps_star;
        j["alpha_at_eps"] = run.alpha_at_eps;
        j["F_at_eps"] = matrix_to_json(run.F_at_eps);
        open_out(out_dir, "design.json") << j.dump(2) << "\n";
    }

    if (run.alpha_at_eps >= 0.0)
        throw UnstableAtEps("closed loop unstable at requested eps = " +
                                std::to_string(cfg.eps) + " (alpha = " +
                                std::to_string(run.alpha_at_eps) + ")",
                            cfg.eps);
    if (run.design.M.cond() > 1e8) {
        // Conditioning warning only; the design is still emitted.
        open_out(out_dir, "warnings.txt")
            << "operator matrix condition number "
            << csv_number(run.design.M.cond()) << " exceeds 1e8\n";
    }
    return run;
}

std::vector<SweepRow> run_sweep(const ProjectConfig& cfg,
                                const std::string& out_dir, bool from_model) {
    if (!cfg.eps_grid) throw ConfigError("sweep requires an eps grid");
    const std::vector<double> grid = cfg.eps_grid->values();

    ensure_dir(out_dir);
    const StateSpaceModel plant = resolve_plant(cfg);
    const Exosystem exo = build_exosystem(cfg.frequencies);
    const FrequencyData fd = acquire_frequency_data(plant, exo, cfg, from_model);
    const SgtrDesign design = design_sgtr(fd, exo, cfg.k);
    const ExogenousSignal d = resolve_disturbance(cfg, plant.nd());
    const double dt = cfg.dt > 0.0 ? cfg.dt : default_time_step(d);

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (double eps : grid) {
        SweepRow row;
        row.eps = eps;
        const ClosedLoopModel loop =
            assemble_closed_loop(plant, design.servo, gain_at(design, eps));
        row.alpha = spectral_abscissa(loop.A);
        row.stable = row.alpha < 0.0;
        if (row.stable) {
            const Trajectory traj = simulate(
                loop, d, Eigen::VectorXd::Zero(loop.dim()), cfg.horizon, dt);
            const Eigen::VectorXd norms =
                traj.error.colwise().norm().transpose();
            const double peak = norms.maxCoeff();
            row.overshoot = peak;
            row.rms_error = std::sqrt(norms.squaredNorm() /
                                      static_cast<double>(norms.size()));
            row.settling_time = -1.0;
            if (peak <= 0.0) {
                row.settling_time = 0.0;
            } else {
                // Last excursion above 1% of peak; settled from the next sample.
                Eigen::Index last_above = -1;
                for (Eigen::Index i = 0; i < norms.size(); ++i)
                    if (norms(i) > 0.01 * peak) last_above = i;
                if (last_above < 0)
                    row.settling_time = 0.0;
                else if (last_above + 1 < norms.size())
                    row.settling_time = traj.time(last_above + 1);
            }
        } else {
            row.settling_time = -1.0;
            row.rms_error = std::numeric_limits<double>::quiet_NaN();
            row.overshoot = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }

    auto os = open_out(out_dir, "sweep.csv");
    os << "eps,alpha,stable,settling_time,rms_error,overshoot\n";
    for (const auto& row : rows) {
        os << csv_number(row.eps) << ',' << csv_number(row.alpha) << ','
           << (row.stable ? 1 : 0) << ',' << csv_number(row.settling_time) << ','
           << csv_number(row.rms_error) << ',' << csv_number(row.overshoot)
           << "\n";
    }
    return rows;
}

Trajectory run_simulate(const ProjectConfig& cfg, const std::string& out_dir,
                        bool from_model) {
    ensure_dir(out_dir);
    const StateSpaceModel plant = resolve_plant(cfg);
    const Exosystem exo = build_exosystem(cfg.frequencies);
    const FrequencyData fd = acquire_frequency_data(plant, exo, cfg, from_model);
    const SgtrDesign design = design_sgtr(fd, exo, cfg.k);
    const ClosedLoopModel loop =
        assemble_closed_loop(plant, design.servo, gain_at(design, cfg.eps));
    if (spectral_abscissa(loop.A) >= 0.0)
        throw UnstableAtEps("closed loop unstable at requested eps = " +
                                std::to_string(cfg.eps),
                            cfg.eps);
    const ExogenousSignal d = resolve_disturbance(cfg, plant.nd());
    const double dt = cfg.dt > 0.0 ? cfg.dt : default_time_step(d);
    const Trajectory traj =
        simulate(loop, d, Eigen::VectorXd::Zero(loop.dim()), cfg.horizon, dt);
    auto os = open_out(out_dir, "trajectory.csv");
    write_trajectory_csv(traj, os);
    return traj;
}

CompareRun run_compare(const ProjectConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    const StateSpaceModel plant = resolve_plant(cfg);
    const Exosystem exo = build_exosystem(cfg.frequencies);
    if (cfg.davison_eps.empty())
        throw ConfigError("compare requires davison.eps tuning gains");

    // SGTR side, designed from frequency-response samples.
    const FrequencyData fd = analytic_frequency_data(plant, exo);
    const SgtrDesign design = design_sgtr(fd, exo, cfg.k);
    const ClosedLoopModel sgtr_loop =
        assemble_closed_loop(plant, design.servo, gain_at(design, cfg.eps));

    // Davison side, sequential closure with per-stage reidentification.
    const DavisonResult davison =
        davison_sequential_design(plant, exo, cfg.davison_eps);

    CompareRun run;
    run.sgtr_spectrum = sorted_spectrum(sgtr_loop.A);
    run.davison_spectrum = sorted_spectrum(davison.loop.A);
    run.sgtr_dominant = run.sgtr_spectrum.front();
    run.davison_dominant = run.davison_spectrum.front();
    if (exo.ell() >= 1)
        run.davison_eps1_upper =
            davison_eps1_stability_upper(plant, exo, cfg.davison_eps[0]);

    if (run.sgtr_dominant.real() >= 0.0 || run.davison_dominant.real() >= 0.0)
        throw UnstableAtEps("a compared controller is unstable at its "
                            "configured gains",
                            cfg.eps);

    const ExogenousSignal d = resolve_disturbance(cfg, plant.nd());
    const double dt = cfg.dt > 0.0 ? cfg.dt : default_time_step(d);
    run.sgtr_trajectory = simulate(sgtr_loop, d,
                                   Eigen::VectorXd::Zero(sgtr_loop.dim()),
                                   cfg.horizon, dt);
    run.davison_trajectory = simulate(davison.loop, d,
                                      Eigen::VectorXd::Zero(davison.loop.dim()),
                                      cfg.horizon, dt);

    {
        auto os = open_out(out_dir, "sgtr_trajectory.csv");
        write_trajectory_csv(run.sgtr_trajectory, os);
    }
    {
        auto os = open_out(out_dir, "davison_trajectory.csv");
        write_trajectory_csv(run.davison_trajectory, os);
    }
    {
        nlohmann::json j;
        j["sgtr"] = {{"eps", cfg.eps},
                     {"k", cfg.k},
                     {"F", matrix_to_json(gain_at(design, cfg.eps))},
                     {"dominant", {run.sgtr_dominant.real(),
                                   run.sgtr_dominant.imag()}},
                     {"spectrum", spectrum_to_json(run.sgtr_spectrum)}};
        nlohmann::json stage_gains = nlohmann::json::array();
        stage_gains.push_back(matrix_to_json(davison.design.F0));
        for (const auto& Fk : davison.design.Fk)
            stage_gains.push_back(matrix_to_json(Fk));
        j["davison"] = {{"eps", cfg.davison_eps},
                        {"stage_gains", std::move(stage_gains)},
                        {"combined_gain",
                         matrix_to_json(davison.design.combined_gain())},
                        {"dominant", {run.davison_dominant.real(),
                                      run.davison_dominant.imag()}},
                        {"spectrum", spectrum_to_json(run.davison_spectrum)},
                        {"eps1_stability_upper", run.davison_eps1_upper}};
        open_out(out_dir, "compare.json") << j.dump(2) << "\n";
    }
    return run;
}

FrequencyData run_ident(const ProjectConfig& cfg, const std::string& out_dir,
                        bool from_model) {
    ensure_dir(out_dir);
    const StateSpaceModel plant = resolve_plant(cfg);
    const Exosystem exo = build_exosystem(cfg.frequencies);
    const FrequencyData fd = acquire_frequency_data(plant, exo, cfg, from_model);
    save_frequency_data(fd, out_dir + "/frequency_data.json");
    return fd;
}

} // namespace sgtr
