#pragma once

#include "mom/analysis.hpp"
#include "mom/scenarios.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mom {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

inline constexpr const char* kSchema = "mom/1";

enum class ScenarioKind { generic2, generic_n, detector, selector, intermittency, spin, position, statistics };

const char* to_string(ScenarioKind k);

struct IntermittencyRun {
    IntermittencySpec spec;
    double z0 = 0.0;
    long long steps = 100'000;
    int bins = 50;
};

struct SpinRun {
    SpinSpec spec;
    int steps = 200;
};

struct StatisticsRun {
    int n_states = 3;
    int dim = 3;
    double beta = 0.5;
    int steps = 100;
};

struct RunConfig {
    ScenarioKind scenario = ScenarioKind::generic2;
    ModelParams model;
    long long trials = 1000;
    std::uint64_t seed = 1;
    std::string output = "mom";
    int threads = 0;

    // generic2 uses probs = (q, 1 - q); generic_n, position take probs;
    // selector takes |D_i|^2
    rvec probs;
    DetectorSpec detector;
    double seed_p = 0.0;  // 0: detector_seed_p
    PositionSpec position;
    IntermittencyRun intermittency;
    SpinRun spin;
    StatisticsRun statistics;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

// Engine-driven scenarios (generic2, generic_n, detector, selector, position).
bool engine_driven(ScenarioKind k);
Scenario make_scenario(const RunConfig& cfg);

// ---- output ------------------------------------------------------------------

// shortest round-trip decimal, independent of the C++ and C locales
std::string format_double(double v);

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trials_csv(std::istream& is);
void write_histogram_csv(std::ostream& os, const Histogram& h);

// summary JSON; `extra` is a serialized JSON object (or empty)
std::string report_json(const EnsembleReport& rep, const std::string& scenario, std::uint64_t seed,
                        const std::string& extra = "");
EnsembleReport report_from_json(const std::string& text);

}  // namespace mom
