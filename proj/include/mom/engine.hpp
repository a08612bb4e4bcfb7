#pragma once

#include "mom/attraction.hpp"
#include "mom/decomap.hpp"
#include "mom/hilbert.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mom {

class GammaSubcritical : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// explicit: exact unitary on the N x A global state.
// ideal: the A -> infinity limit of a diagonal decohering block with the same
// X_ij; Q_ij picks up exp(-X_ij dt^2 / 2) per cycle and the global state is
// kept as the N x N purification sqrt(Q).
enum class Environment { explicit_unitary, ideal_dephasing };

// Ideal environment only. Amplitude damping of pointer `from` into `to`:
// Q_ff *= exp(-rate), Q_tt gains the difference, coherences of `from` decay
// at half the rate. Stands in for an active term fed by a mixing environment.
struct DecayChannel {
    int from = 0;
    int to = 1;
    double rate = 0.0;
};

struct CycleConfig {
    DecoherenceSpec chaos;
    ShiftSpec shift;
    AttractionParams attraction;
    HamiltonianSpec hamiltonian;
    double capture_epsilon = 1e-6;
    int capture_window = 10;
    long long max_cycles = 1'000'000;
    // local->global before global->local
    bool reverse_attraction = false;
    double rho = 8.0;
    double dt = 1.0;
    Environment environment = Environment::explicit_unitary;
    std::optional<DecayChannel> decay;

    void validate() const;
};

struct RunState {
    LocalState local;
    GlobalState global;
    long long cycle_index = 0;
    int captured_streak = 0;
    int streak_index = -1;
};

struct Outcome {
    int pointer_index = -1;
    long long cycles_elapsed = 0;
    double final_z = 0.0;
    std::vector<std::string> deviation_flags;
};

enum class Status { collapsed, censored, subcritical };

struct MeasurementResult {
    Status status = Status::censored;
    Outcome outcome;
};

using CycleObserver = std::function<void(const RunState&)>;

class Engine {
public:
    explicit Engine(CycleConfig cfg);

    const CycleConfig& config() const { return cfg_; }
    // true when the N=2 closed-form kernel is in use
    bool two_level_kernel() const { return fast2_; }

    // returns true if the density-on-state map hit its degenerate limit
    bool step(RunState& s) const;
    // updates the capture streak; index of the captured pointer or -1
    int update_capture(RunState& s) const;
    MeasurementResult run(RunState s, const CycleObserver& obs = {}) const;

private:
    bool step_general(RunState& s) const;
    bool step_two_level(RunState& s) const;

    void dephase(GlobalState& g) const;

    CycleConfig cfg_;
    Propagator prop_;
    rmat damp_;  // ideal environment coherence factors
    double beta_;
    bool fast2_;
};

// N x N purification C = sqrt(Q)
GlobalState purify(const ReducedDensity& q);

RunState step(const RunState& state, const CycleConfig& cfg);
MeasurementResult run_measurement(const RunState& initial, const CycleConfig& cfg);

// P* = lambda_c^-4, lambda_c^2 being the map strength
double capture_threshold(const CycleConfig& cfg);
// 4 (ln(1 + rho))^2 / beta^2 cycles
double min_measurement_time(double beta, double rho);
// (ln (1 + lambda_c^2)^2)^2 / beta^2 cycles
double measurement_time_estimate(double lambda2, double beta);
// smallest beta giving an average measurement in T* (units of dt)
double beta_star(double t_star_over_dt, double rho);

}  // namespace mom
