#pragma once

#include "mom/engine.hpp"
#include "mom/rng.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mom {

class OrbitDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One-dimensional map with derivative. Periodic maps are reduced to
// [lo, hi) after each step; otherwise leaving [lo, hi] is an error.
struct OrbitMap {
    std::function<double(double)> f;
    std::function<double(double)> df;
    double x0 = 0.3;
    double lo = 0.0;
    double hi = 1.0;
    bool periodic = false;
};

// phi' = phi + k cos(phi) sin(phi) on [0, 2 pi)
OrbitMap phi_map(double k, double x0 = 0.3);
// g o f0 o g^-1 in phi with extent s, on [0, 2 pi)
OrbitMap effective_phi_map(double k, double s = 1.0, double x0 = 0.3);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> density;  // integrates to 1 over [lo, hi)

    double width() const { return (hi - lo) / static_cast<double>(density.size()); }
    double center(std::size_t b) const { return lo + (static_cast<double>(b) + 0.5) * width(); }
};

struct OrbitStats {
    double liapunov = 0.0;
    Histogram histogram;
    long long transient = 0;
    long long length = 0;
};

inline constexpr long long kDefaultTransient = 1000;

// Orbit average of log|f'| after the transient. A superstable orbit that
// lands on f' = 0 contributes log of the smallest normal double.
double liapunov(const OrbitMap& map, long long transient, long long length);
Histogram invariant_distribution(const OrbitMap& map, int bins, long long length,
                                 long long transient = kDefaultTransient);
OrbitStats orbit_stats(const OrbitMap& map, int bins, long long transient, long long length);

// total variation distance between a histogram and the uniform density
double tv_from_uniform(const Histogram& h);

// N=2 effective-map orbit in the angle representation; fraction of iterates
// with min(p, 1-p) > threshold
double concentration_excess(double k, double s, long long length, double threshold, double phi0 = 0.3);

// ---- Feller walks -----------------------------------------------------------

enum class Barrier { absorbing, reflecting };

// (x, up) -> x'
using StepRule = std::function<double(double, bool)>;

// x' = x +- beta x (1 - x)
StepRule multiplicative_step(double beta);
StepRule constant_step(double dz);

struct FellerSpec {
    double x0 = 0.5;
    StepRule step;
    Barrier barrier = Barrier::absorbing;
    double lower = 0.0;  // absorbing: x <= lower ends the walk at the bottom
    double upper = 1.0;
    double p_up = 0.5;
    long long max_steps = 10'000'000;
    int trials = 1000;
    std::uint64_t seed = 1;
    int bins = 50;       // reflecting: occupancy histogram on [lower, upper]
};

struct FellerResult {
    double prob_upper = 0.0;  // absorbing: fraction absorbed at the top
    double stderr_upper = 0.0;
    double mean_steps = 0.0;  // absorbing trials only
    int absorbed = 0;
    int censored = 0;
    Histogram occupancy;      // reflecting
};

FellerResult feller_absorption(const FellerSpec& spec);

// ---- ensemble reports -------------------------------------------------------

struct TrialRecord {
    long long trial = 0;
    int outcome = -1;
    long long cycles = 0;
    double final_z = 0.0;
    bool censored = false;
    bool error = false;
    std::string message;
};

TrialRecord to_record(long long trial, const MeasurementResult& r);

struct EnsembleReport {
    std::vector<long long> outcome_counts;
    std::vector<double> target_probs;
    std::vector<double> frequencies;
    std::vector<double> corrected_probs;  // q(z) = (z - delta) / (1 - 2 delta)
    double chi_square = 0.0;              // against target
    double chi_square_p = 1.0;
    double chi_square_corrected = 0.0;    // against corrected_probs
    double binomial_p = 1.0;              // exact test, outcome 0 vs target, two outcomes
    double mean_time = 0.0;               // collapsed trials
    double mean_time_lower = 0.0;         // censored trials counted at their cutoff
    long long censored = 0;
    long long errors = 0;
    long long trials = 0;
    double deviation_bound = 0.0;
    double max_deviation = 0.0;           // max |freq - target|
};

// Two-sided exact binomial test.
double binomial_test(long long successes, long long n, double p);
// chi-square with Yates correction for two categories; categories with zero
// expectation are skipped
double chi_square(const std::vector<long long>& counts, const std::vector<double>& probs, bool yates);
double chi_square_sf(double stat, int dof);

EnsembleReport born_report(const std::vector<TrialRecord>& records, const std::vector<double>& target, double delta);

}  // namespace mom
