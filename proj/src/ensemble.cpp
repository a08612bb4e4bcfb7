#include "mom/ensemble.hpp"

#include <omp.h>

#include <exception>

namespace mom {

TrialRecord run_trial(const Engine& engine, const Scenario& sc, long long trial, std::uint64_t seed) {
    try {
        Rng rng(seed, static_cast<std::uint64_t>(trial));
        return to_record(trial, engine.run(sc.initial(rng)));
    } catch (const std::exception& e) {
        TrialRecord r;
        r.trial = trial;
        r.error = true;
        r.censored = true;
        r.message = e.what();
        return r;
    }
}

std::vector<TrialRecord> run_serial(const Scenario& sc, long long trials, std::uint64_t seed) {
    const Engine engine(sc.cycle);
    std::vector<TrialRecord> out;
    out.reserve(static_cast<std::size_t>(trials));
    for (long long t = 0; t < trials; ++t) out.push_back(run_trial(engine, sc, t, seed));
    return out;
}

std::vector<TrialRecord> run_parallel(const Scenario& sc, long long trials, std::uint64_t seed, int threads) {
    const Engine engine(sc.cycle);
    std::vector<TrialRecord> out(static_cast<std::size_t>(trials));
    const int nt = threads > 0 ? threads : omp_get_max_threads();
    // capture times vary by orders of magnitude, hence dynamic scheduling
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt)
    for (long long t = 0; t < trials; ++t) out[static_cast<std::size_t>(t)] = run_trial(engine, sc, t, seed);
    return out;
}

}  // namespace mom
