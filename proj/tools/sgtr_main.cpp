#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sgtr/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    bool from_model = false;
    double eps_override = -1.0;
    std::string eps_grid_spec;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_grid) {
    cmd->add_option("--config", opts.config_path, "Project config file (JSON)")
        ->required();
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_flag("--from-model", opts.from_model,
                  "Use analytic transfer evaluation instead of probing");
    cmd->add_option("--eps", opts.eps_override, "Override the design eps");
    if (with_grid)
        cmd->add_option("--eps-grid", opts.eps_grid_spec,
                        "Log-spaced eps grid as start:stop:points");
}

sgtr::ProjectConfig load(const CommonOpts& opts) {
    sgtr::ProjectConfig cfg = sgtr::load_config(opts.config_path);
    if (opts.eps_override > 0.0) cfg.eps = opts.eps_override;
    if (!opts.eps_grid_spec.empty()) {
        sgtr::EpsGrid grid;
        if (std::sscanf(opts.eps_grid_spec.c_str(), "%lf:%lf:%d", &grid.start,
                        &grid.stop, &grid.points) != 3)
            throw sgtr::ConfigError("--eps-grid expects start:stop:points");
        cfg.eps_grid = grid;
    }
    return cfg;
}

std::string out_dir(const CommonOpts& opts, const sgtr::ProjectConfig& cfg) {
    return opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-gain tuning regulator toolkit"};
    app.require_subcommand(1);

    CommonOpts design_opts, sweep_opts, simulate_opts, compare_opts, ident_opts;
    auto* design = app.add_subcommand(
        "design", "Design the regulator, certify the low-gain margin");
    add_common(design, design_opts, false);
    auto* sweep = app.add_subcommand(
        "sweep", "Evaluate closed-loop metrics over an eps grid");
    add_common(sweep, sweep_opts, true);
    auto* simulate = app.add_subcommand(
        "simulate", "Simulate the closed loop against the configured signal");
    add_common(simulate, simulate_opts, false);
    auto* compare = app.add_subcommand(
        "compare", "Compare the single-gain design with the sequential one");
    add_common(compare, compare_opts, false);
    auto* ident = app.add_subcommand(
        "ident", "Probe the plant and export frequency data");
    add_common(ident, ident_opts, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed()) {
            const auto cfg = load(design_opts);
            const auto run =
                sgtr::run_design(cfg, out_dir(design_opts, cfg),
                                 design_opts.from_model);
            std::cout << "design: certificate "
                      << (run.certificate.pass ? "pass" : "fail")
                      << ", c = " << sgtr::csv_number(run.certificate.c)
                      << ", eps_star = " << sgtr::csv_number(run.eps_star)
                      << ", alpha(eps) = " << sgtr::csv_number(run.alpha_at_eps)
                      << "\n";
        } else if (sweep->parsed()) {
            const auto cfg = load(sweep_opts);
            const auto rows =
                sgtr::run_sweep(cfg, out_dir(sweep_opts, cfg),
                                sweep_opts.from_model);
            std::cout << "sweep: " << rows.size() << " rows written\n";
        } else if (simulate->parsed()) {
            const auto cfg = load(simulate_opts);
            const auto traj =
                sgtr::run_simulate(cfg, out_dir(simulate_opts, cfg),
                                   simulate_opts.from_model);
            std::cout << "simulate: " << traj.time.size() << " samples written\n";
        } else if (compare->parsed()) {
            const auto cfg = load(compare_opts);
            const auto run = sgtr::run_compare(cfg, out_dir(compare_opts, cfg));
            std::cout << "compare: dominant re(sgtr) = "
                      << sgtr::csv_number(run.sgtr_dominant.real())
                      << ", re(davison) = "
                      << sgtr::csv_number(run.davison_dominant.real()) << "\n";
        } else if (ident->parsed()) {
            const auto cfg = load(ident_opts);
            const auto fd = sgtr::run_ident(cfg, out_dir(ident_opts, cfg),
                                            ident_opts.from_model);
            std::cout << "ident: " << fd.samples.size()
                      << " harmonic samples written (" << fd.provenance << ")\n";
        }
    } catch (const sgtr::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const sgtr::NonResonanceViolated& ex) {
        std::cerr << "design infeasible: " << ex.what() << "\n";
        return 3;
    } catch (const sgtr::UnstableAtEps& ex) {
        std::cerr << "instability: " << ex.what() << "\n";
        return 4;
    } catch (const sgtr::StageDestabilized& ex) {
        std::cerr << "instability: " << ex.what() << "\n";
        return 4;
    } catch (const sgtr::DivergenceError& ex) {
        std::cerr << "instability: " << ex.what() << "\n";
        return 4;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
