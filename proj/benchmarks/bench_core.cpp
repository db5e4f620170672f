// SPDX-License-Identifier: Apache-2.0
#include "ftns/controller.hpp"
#include "ftns/sim.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ftns;

FlowParams flow() { return FlowParams::make(3.0, 1.5, 1.0, 1e-4); }
GainSet gains() { return GainSet::make(5.0, 10.0, 100.0); }
DitherSpec dither() { return DitherSpec::make(1.0, std::vector<double>{150.0, 200.0}); }

Eigen::VectorXd initial()
{
    Eigen::VectorXd y(7);
    y << 0, 1, 0.01, 0.01, 1, 0, 1;
    return y;
}

void BM_ScaledFlow(benchmark::State& state)
{
    const FlowParams p = flow();
    Eigen::VectorXd v = Eigen::VectorXd::Constant(state.range(0), 0.3);
    Eigen::VectorXd out(v.size());
    for (auto _ : state) {
        scaled_flow_into(v, p, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_ScaledFlow)->Arg(2)->Arg(8);

void BM_EscRhs(benchmark::State& state)
{
    const EscSystem sys(gains(), flow(), dither(), CostModel::reference_quadratic());
    const Eigen::VectorXd y = initial();
    Eigen::VectorXd dy(y.size());
    double t = 0;
    for (auto _ : state) {
        sys(t, y, dy);
        t += 1e-3;
        benchmark::DoNotOptimize(dy.data());
    }
}
BENCHMARK(BM_EscRhs);

void BM_AveragedRhs(benchmark::State& state)
{
    const AveragedSystem sys(gains(), flow(), dither(), CostModel::reference_quadratic(),
                             AveragingMode::kArgument, {}, static_cast<int>(state.range(0)));
    const Eigen::VectorXd y = initial();
    Eigen::VectorXd dy(y.size());
    for (auto _ : state) {
        sys(0.0, y, dy);
        benchmark::DoNotOptimize(dy.data());
    }
}
BENCHMARK(BM_AveragedRhs)->Arg(256)->Arg(1024);

// One second of the closed loop at the default record step.
void BM_IntegrateEsc(benchmark::State& state)
{
    const EscSystem sys(gains(), flow(), dither(), CostModel::reference_quadratic());
    SimConfig cfg;
    cfg.t_end = 1.0;
    cfg.dt = common_period(sys.dither()) / 64;
    for (auto _ : state) {
        Trajectory tr = integrate(std::cref(sys), initial(), cfg, {2, true});
        benchmark::DoNotOptimize(tr.states.back().data());
    }
}
BENCHMARK(BM_IntegrateEsc)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
