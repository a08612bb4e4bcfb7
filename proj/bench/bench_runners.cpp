#include "mom/ensemble.hpp"
#include "mom/scenarios.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

namespace {

mom::Scenario two_outcome() {
    mom::ModelParams m;
    m.k = 16.0;
    m.beta = 0.2;
    return mom::build_generic(m, mom::rvec::Constant(2, 0.5));
}

mom::Scenario three_outcome() {
    mom::ModelParams m;
    m.k = 16.0;
    m.beta = 0.5;
    mom::rvec p(3);
    p << 0.2, 0.3, 0.5;
    return mom::build_generic(m, p);
}

void BM_Serial(benchmark::State& st) {
    const mom::Scenario sc = st.range(1) == 2 ? two_outcome() : three_outcome();
    for (auto _ : st) benchmark::DoNotOptimize(mom::run_serial(sc, st.range(0), 1));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_Parallel(benchmark::State& st) {
    const mom::Scenario sc = st.range(1) == 2 ? two_outcome() : three_outcome();
    const int threads = static_cast<int>(st.range(2));
    for (auto _ : st) benchmark::DoNotOptimize(mom::run_parallel(sc, st.range(0), 1, threads));
    st.SetItemsProcessed(st.iterations() * st.range(0));
    st.counters["threads"] = threads > 0 ? threads : omp_get_max_threads();
}

void BM_EffectiveMap(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto spec = mom::DecoherenceSpec::from_map_strength(16.0);
    mom::ShiftSpec shift;
    mom::Rng rng(3, 0);
    mom::cvec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.complex_normal();
    mom::LocalState s = mom::LocalState::from(v);
    for (auto _ : st) {
        s = mom::effective_map(spec, shift, s);
        benchmark::DoNotOptimize(s.amps.data());
    }
}

}  // namespace

// args: trials, outcomes[, threads]
BENCHMARK(BM_Serial)->Args({256, 2})->Args({16, 3})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Parallel)
    ->Args({256, 2, 1})
    ->Args({256, 2, 2})
    ->Args({256, 2, 0})
    ->Args({16, 3, 0})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_EffectiveMap)->Arg(2)->Arg(3)->Arg(8);

BENCHMARK_MAIN();
