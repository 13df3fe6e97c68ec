#include <benchmark/benchmark.h>

#include "sgtr/config.hpp"
#include "sgtr/ident.hpp"
#include "sgtr/lowgain.hpp"
#include "sgtr/lti.hpp"

namespace {

sgtr::StateSpaceModel four_tank() {
    sgtr::ProjectConfig cfg =
        sgtr::load_config(std::string(SGTR_CONFIG_DIR) + "/four_tank.json");
    return sgtr::resolve_plant(cfg);
}

void BM_SslgApplyData(benchmark::State& state) {
    const auto plant = four_tank();
    const auto exo = sgtr::build_exosystem({0.01, 0.1});
    const auto fd = sgtr::analytic_frequency_data(plant, exo);
    const auto spec = sgtr::spectral_projectors(exo);
    const Eigen::MatrixXd F = Eigen::MatrixXd::Random(2, 10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sgtr::sslg_apply_data(fd, spec, F));
    }
}
BENCHMARK(BM_SslgApplyData);

void BM_SslgApplyModel(benchmark::State& state) {
    const auto plant = four_tank();
    const auto exo = sgtr::build_exosystem({0.01, 0.1});
    const auto servo = sgtr::build_servocompensator(exo, 2);
    const Eigen::MatrixXd F = Eigen::MatrixXd::Random(2, 10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sgtr::sslg_apply_model(plant, servo, F));
    }
}
BENCHMARK(BM_SslgApplyModel);

void BM_GainAt(benchmark::State& state) {
    const auto plant = four_tank();
    const auto exo = sgtr::build_exosystem({0.01, 0.1});
    const auto design = sgtr::design_sgtr(sgtr::analytic_frequency_data(plant, exo),
                                          exo, {6.21, 28.42, 30.77});
    double eps = 1e-4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sgtr::gain_at(design, eps));
        eps = eps < 1e-3 ? eps * 1.01 : 1e-4;
    }
}
BENCHMARK(BM_GainAt);

void BM_CertifyLowGain(benchmark::State& state) {
    const auto plant = four_tank();
    const auto exo = sgtr::build_exosystem({0.01, 0.1});
    const auto design = sgtr::design_sgtr(sgtr::analytic_frequency_data(plant, exo),
                                          exo, {6.21, 28.42, 30.77});
    const auto loop_at = [&](double eps) {
        return sgtr::assemble_closed_loop(plant, design.servo,
                                          sgtr::gain_at(design, eps))
            .A;
    };
    for (auto _ : state) {
        benchmark::DoNotOptimize(sgtr::certify_low_gain(loop_at, 2e-4));
    }
}
BENCHMARK(BM_CertifyLowGain);

void BM_SimulateFourTank(benchmark::State& state) {
    const auto plant = four_tank();
    const auto exo = sgtr::build_exosystem({0.01, 0.1});
    const auto design = sgtr::design_sgtr(sgtr::analytic_frequency_data(plant, exo),
                                          exo, {6.21, 28.42, 30.77});
    const auto loop = sgtr::assemble_closed_loop(plant, design.servo,
                                                 sgtr::gain_at(design, 2e-4));
    Eigen::VectorXd c(1), z(1), s(1);
    c << 1.0;
    z << 0.0;
    s << 1.0;
    const sgtr::ExogenousSignal d(c, {{0.01, z, s}, {0.1, z, s}});
    const double horizon = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sgtr::simulate(
            loop, d, Eigen::VectorXd::Zero(loop.dim()), horizon, 0.02));
    }
}
BENCHMARK(BM_SimulateFourTank)->Arg(100)->Arg(1000);

} // namespace

BENCHMARK_MAIN();
