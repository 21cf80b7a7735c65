#include "fractalqw/analysis.hpp"
#include "fractalqw/evolve.hpp"
#include "fractalqw/fractal_pattern.hpp"
#include "fractalqw/walker.hpp"

#include <benchmark/benchmark.h>

#include <vector>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

using namespace fqw;

static void BM_CarpetAdvance(benchmark::State& st) {
    const auto t_max = st.range(0);
    std::vector<std::uint8_t> scratch;
    for (auto _ : st) {
        FractalRow row;
        for (std::int64_t t = 0; t < t_max; ++t) row.advance(scratch);
        benchmark::DoNotOptimize(row.count_ones());
    }
    st.SetItemsProcessed(st.iterations() * t_max * t_max);
}
BENCHMARK(BM_CarpetAdvance)->Arg(1000)->Arg(10'000);

static void BM_StepInto(benchmark::State& st) {
    const auto t_max = st.range(0);
    const auto mode = static_cast<WalkMode>(st.range(1));
    const CoinParams coins = CoinParams::from_degrees(45, 45);
#if defined(__SSE2__)
    // match evolve(), which flushes subnormals for the run
    const auto saved = _mm_getcsr();
    _mm_setcsr(saved | 0x8040);
#endif
    for (auto _ : st) {
        WalkerState a = initial_state(kPi / 2, kPi / 2, 0, t_max + 1);
        WalkerState b = a;
        b.up_at(0) = {};
        b.down_at(0) = {};
        FractalRow row;
        std::vector<std::uint8_t> scratch;
        for (std::int64_t t = 0; t < t_max; ++t) {
            detail::step_into(a, b, &row, coins, mode);
            std::swap(a, b);
            row.advance(scratch);
        }
        benchmark::DoNotOptimize(a.up_amplitudes().data());
    }
#if defined(__SSE2__)
    _mm_setcsr(saved);
#endif
    st.SetItemsProcessed(st.iterations() * t_max * t_max);
}
BENCHMARK(BM_StepInto)
    ->Args({2000, static_cast<int>(WalkMode::Fractal)})
    ->Args({2000, static_cast<int>(WalkMode::UniformHadamard)})
    ->Args({10'000, static_cast<int>(WalkMode::Fractal)});

static void BM_EvolveSecondMoment(benchmark::State& st) {
    EvolveConfig cfg;
    cfg.t_max = st.range(0);
    const std::vector<Observer> obs{second_moment_observer(SampleSchedule::log_spaced(1, cfg.t_max, 50))};
    for (auto _ : st) benchmark::DoNotOptimize(evolve(cfg, obs));
}
BENCHMARK(BM_EvolveSecondMoment)->Arg(10'000)->Unit(benchmark::kMillisecond);

static void BM_EvolveEntropyEveryStep(benchmark::State& st) {
    EvolveConfig cfg;
    cfg.t_max = st.range(0);
    const std::vector<Observer> obs{entropy_observer(SampleSchedule::every(1))};
    for (auto _ : st) benchmark::DoNotOptimize(evolve(cfg, obs));
}
BENCHMARK(BM_EvolveEntropyEveryStep)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
