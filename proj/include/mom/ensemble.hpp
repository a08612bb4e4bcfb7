#pragma once

#include "mom/analysis.hpp"
#include "mom/scenarios.hpp"

#include <cstdint>
#include <vector>

namespace mom {

// Trial i draws its initial state from Rng(seed, i); the engine itself is
// deterministic, so a trial's record does not depend on which worker ran it.
TrialRecord run_trial(const Engine& engine, const Scenario& sc, long long trial, std::uint64_t seed);

// Reference implementation: one thread, trial order.
std::vector<TrialRecord> run_serial(const Scenario& sc, long long trials, std::uint64_t seed);

// OpenMP worker pool; threads <= 0 keeps the runtime default. Records come
// back indexed by trial.
std::vector<TrialRecord> run_parallel(const Scenario& sc, long long trials, std::uint64_t seed, int threads);

}  // namespace mom
