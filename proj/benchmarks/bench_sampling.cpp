#include <benchmark/benchmark.h>

#include "sqsolve/compressed_solution.hpp"
#include "sqsolve/problems.hpp"
#include "sqsolve/solver.hpp"

using namespace sqsolve;

namespace {

std::shared_ptr<const SQMatrix> bench_matrix(std::size_t n, std::size_t d)
{
    RandomStream rng(1);
    DenseMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    return std::make_shared<const SQMatrix>(std::move(a));
}

} // namespace

static void BM_SampleRow(benchmark::State& state)
{
    const auto m = bench_matrix(static_cast<std::size_t>(state.range(0)), 64);
    RandomStream rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(m->sample_row(rng));
}
BENCHMARK(BM_SampleRow)->Arg(256)->Arg(4096)->Arg(65536);

static void BM_SampleEntryInRow(benchmark::State& state)
{
    const auto m = bench_matrix(64, static_cast<std::size_t>(state.range(0)));
    m->prebuild_row_entry_samplers();
    RandomStream rng(3);
    Index r = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(m->sample_entry_in_row(r, rng));
        r = (r + 1) % 64;
    }
}
BENCHMARK(BM_SampleEntryInRow)->Arg(64)->Arg(1024)->Arg(16384);

static void BM_RejectionSample(benchmark::State& state)
{
    const auto nnz = static_cast<std::size_t>(state.range(0));
    const auto m = bench_matrix(nnz, 200);
    SparseIterate y(nnz);
    RandomStream rng(4);
    for (Index r = 0; r < nnz; ++r) y.set(r, rng.normal());
    CompressedSolution sol(m, std::move(y));
    (void)sol.compute_phi();
    std::size_t rounds = 0;
    for (auto _ : state) rounds += sol.sample(rng).iterations_used;
    state.counters["rounds_per_sample"] =
        benchmark::Counter(static_cast<double>(rounds), benchmark::Counter::kAvgIterations);
    state.counters["phi"] = sol.compute_phi();
}
BENCHMARK(BM_RejectionSample)->Arg(4)->Arg(32)->Arg(128);
