#include <benchmark/benchmark.h>

#include "sqsolve/problems.hpp"
#include "sqsolve/solver.hpp"

using namespace sqsolve;

namespace {

const problems::GeneratedProblem& desk_problem()
{
    static const auto p = [] {
        RandomStream rng(5);
        return problems::generate(300, 200, problems::geometric_spectrum(50, 1e-15, 9), rng);
    }();
    return p;
}

} // namespace

// one iteration with a warm iterate of about `range(1)` stored rows
static void BM_Step(benchmark::State& state)
{
    const auto& p = desk_problem();
    SolverParams params = default_params(*p.matrix, 0.25, p.kappa_sq, p.kappaF_sq, p.spectral_norm_sq());
    params.C = static_cast<std::size_t>(state.range(0));
    const std::span<const double> b(p.b.data(), static_cast<std::size_t>(p.b.size()));

    RandomStream rng(6);
    SparseIterate warm(p.matrix->rows());
    while (warm.stored() < static_cast<std::size_t>(state.range(1))) step(*p.matrix, b, warm, params, rng);

    for (auto _ : state) {
        state.PauseTiming();
        SparseIterate y = warm;
        state.ResumeTiming();
        step(*p.matrix, b, y, params, rng);
        benchmark::DoNotOptimize(y.values().data());
    }
}
BENCHMARK(BM_Step)->Args({1000, 10})->Args({30000, 10})->Args({30000, 250})->Unit(benchmark::kMicrosecond);

static void BM_SolveDefault(benchmark::State& state)
{
    const auto& p = desk_problem();
    const auto params = default_params(*p.matrix, 0.25, p.kappa_sq, p.kappaF_sq, p.spectral_norm_sq());
    const std::span<const double> b(p.b.data(), static_cast<std::size_t>(p.b.size()));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        RandomStream rng(seed++);
        benchmark::DoNotOptimize(solve(p.matrix, b, params, rng).iterate().stored());
    }
}
BENCHMARK(BM_SolveDefault)->Unit(benchmark::kMillisecond)->Iterations(3);
