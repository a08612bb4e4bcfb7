#pragma once

#include "mom/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mom {

struct RunOutput {
    std::vector<TrialRecord> records;
    EnsembleReport report;
    std::string extra;  // scenario-specific JSON object
    std::optional<Histogram> histogram;
};

// Runs every trial of a validated config. Engine-driven scenarios go through
// run_parallel; the others run their own per-trial loops with the same
// Rng(seed, trial) streams.
RunOutput run_config(const RunConfig& cfg);

}  // namespace mom
