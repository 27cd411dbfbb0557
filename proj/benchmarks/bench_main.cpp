#include "rieszlab/energy.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/sampler.hpp"
#include "rieszlab/toeplitz.hpp"
#include "rieszlab/transport.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace riesz;

namespace {

void BM_ToeplitzApply(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const double h = 4.0 / static_cast<double>(n);
    const ToeplitzOperator T(n, [h](long k) { return cell_pair_weight_1d(static_cast<double>(k) * h, h, 0.5); });
    std::vector<double> x(n, 1.0), y(n);
    for (auto _ : st) {
        T.apply(x, y);
        benchmark::DoNotOptimize(y.data());
    }
    st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_ToeplitzApply)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNLogN);

void BM_FractionalLaplacianGrid(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const Grid g = Grid::line(-1.5, 1.5, n);
    const auto f = SampledFunction::from(g, [](double x, double) { return x * x < 1 ? std::sqrt(1 - x * x) : 0.0; });
    for (auto _ : st) benchmark::DoNotOptimize(frac_laplacian_grid(f, 0.5));
}
BENCHMARK(BM_FractionalLaplacianGrid)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

// one sweep = N single-particle proposals
void BM_MetropolisSweep(benchmark::State& st) {
    const auto N = static_cast<std::size_t>(st.range(0));
    const auto model = GasModel::confined(RieszParams::make(1, 0.0), Potential::quadratic(1.0));
    auto chain = ChainState::make(model, initial_configuration(model, N), 2.0, 5, 1.0 / static_cast<double>(N));
    for (auto _ : st)
        for (std::size_t k = 0; k < N; ++k) benchmark::DoNotOptimize(metropolis_step(chain, model, 2.0));
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations()) * st.range(0));
}
BENCHMARK(BM_MetropolisSweep)->Arg(64)->Arg(256)->Arg(1024);

void BM_EquilibriumSolve(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto p = RieszParams::make(1, 0.5);
    for (auto _ : st) benchmark::DoNotOptimize(solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, n), p));
}
BENCHMARK(BM_EquilibriumSolve)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_NextOrderEnergy(benchmark::State& st) {
    const auto N = static_cast<std::size_t>(st.range(0));
    const auto p = RieszParams::make(1, 0.5);
    const auto eq = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-2, 2, 512), p);
    const MeasurePotential pot(eq.mu, p);
    const auto X = initial_configuration(GasModel::confined(p, Potential::quadratic(1.0)), N);
    for (auto _ : st) benchmark::DoNotOptimize(next_order_energy(X, pot, p));
}
BENCHMARK(BM_NextOrderEnergy)->Arg(64)->Arg(256);

void BM_TransportSolve(benchmark::State& st) {
    const auto p = RieszParams::make(1, 0.0);
    const auto eq = solve_equilibrium(Potential::quadratic(1.0), Grid::line(-4, 4, static_cast<std::size_t>(st.range(0))), p);
    const auto phi = TestFunction::bump(0.0, 0.2);
    for (auto _ : st) benchmark::DoNotOptimize(solve_transport_1d(phi, eq));
}
BENCHMARK(BM_TransportSolve)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
