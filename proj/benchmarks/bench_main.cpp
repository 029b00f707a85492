#include <benchmark/benchmark.h>

#include "relaysim/harness.hpp"

using namespace relaysim;

namespace {

SystemParams bench_params(std::uint32_t n) {
    SystemParams p;
    p.a_sq = 1.5;
    p.b_sq = 0.5;
    p.gamma = 2.0;
    p.snr_base = 3.0;
    p.N = n;
    p.eps = p.eps1 = p.eps2 = 0.5;
    return p;
}

}  // namespace

static void BM_exact_tails(benchmark::State& state) {
    const std::uint32_t n = static_cast<std::uint32_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_tails(n, 1.9, 1.3));
    }
}
BENCHMARK(BM_exact_tails)->Arg(8)->Arg(64)->Arg(512);

static void BM_exact_end_to_end(benchmark::State& state) {
    const SystemParams p = bench_params(32);
    const CodebookParams cb = CodebookParams::make(4, 8);
    const Thresholds th = make_thresholds(p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_end_to_end(p, cb, th));
    }
}
BENCHMARK(BM_exact_end_to_end);

static void BM_trial_block(benchmark::State& state) {
    const SystemParams p = bench_params(static_cast<std::uint32_t>(state.range(0)));
    const CodebookParams cb = CodebookParams::make(4, 8);
    const Thresholds th = make_thresholds(p);
    std::uint64_t i = 0;
    for (auto _ : state) {
        Rng rng(trial_seed(1, i++));
        const std::uint64_t m = uniform_index(rng, cb.M_S);
        benchmark::DoNotOptimize(run_trial(m, p, cb, th, rng));
    }
}
BENCHMARK(BM_trial_block)->Arg(8)->Arg(32)->Arg(128);

static void BM_batch_counts(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.params = bench_params(static_cast<std::uint32_t>(state.range(0)));
    cfg.codebook = CodebookParams::make(64, 1024);
    cfg.n_trials = 10000;
    cfg.engine = Engine::Counts;
    cfg.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_batch(cfg));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(cfg.n_trials));
}
BENCHMARK(BM_batch_counts)->Arg(32)->Arg(128);

BENCHMARK_MAIN();
