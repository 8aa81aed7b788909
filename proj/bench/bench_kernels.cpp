// Serial reference vs OpenMP kernels on the wide mixed table.
//
//   ./build/bench/bench_kernels --benchmark_filter=Fill

#include <benchmark/benchmark.h>

#include "depthscope/kernels.hpp"
#include "depthscope/synthetic.hpp"

using namespace depthscope;

namespace {

struct Fixture {
    Dataset ds = generate_synthetic(WideMixed{}, 1);
    CompiledDataset compiled{ds};
    BandPlan plan = plan_bands(ds, 20'000, 1);
    InclusionMatrix matrix = build_inclusion_matrix(ds, plan);
    BandMask mask = mask_by_tau(matrix, tau_at_quantile(matrix, 0.5));
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

void BM_FillSerial(benchmark::State& state)
{
    const auto& f = fixture();
    InclusionMatrix m;
    for (auto _ : state) {
        m.reset(f.ds.size(), f.plan.band_count());
        kernels::fill_inclusion_serial(f.compiled, f.plan, m);
        benchmark::DoNotOptimize(m.bits.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.plan.band_count()));
}

void BM_FillOmp(benchmark::State& state)
{
    const auto& f = fixture();
    InclusionMatrix m;
    for (auto _ : state) {
        m.reset(f.ds.size(), f.plan.band_count());
        kernels::fill_inclusion_omp(f.compiled, f.plan, m, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(m.bits.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.plan.band_count()));
}

void BM_SimilaritySerial(benchmark::State& state)
{
    const auto& f = fixture();
    std::vector<double> out(f.matrix.n * f.matrix.n);
    const auto mode = static_cast<kernels::SimilarityMode>(state.range(0));
    for (auto _ : state) {
        kernels::similarity_serial(f.matrix, f.mask.words, f.mask.unmasked, mode, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_SimilarityOmp(benchmark::State& state)
{
    const auto& f = fixture();
    std::vector<double> out(f.matrix.n * f.matrix.n);
    const auto mode = static_cast<kernels::SimilarityMode>(state.range(0));
    for (auto _ : state) {
        kernels::similarity_omp(f.matrix, f.mask.words, f.mask.unmasked, mode, out, static_cast<int>(state.range(1)));
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(BM_FillSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FillOmp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimilaritySerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimilarityOmp)->Args({0, 1})->Args({0, 4})->Args({1, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
