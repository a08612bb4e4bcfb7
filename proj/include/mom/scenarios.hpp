#pragma once

#include "mom/analysis.hpp"
#include "mom/engine.hpp"
#include "mom/rng.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace mom {

// Dimensionless model constants shared by the engine-driven scenarios.
struct ModelParams {
    double k = 16.0;  // map strength lambda_c^2
    double beta = 0.05;
    double gamma = 1.0;
    double s = 1.0;
    double capture_epsilon = 1e-6;
    int capture_window = 10;
    long long max_cycles = 1'000'000;
    bool reverse_attraction = false;
    Environment environment = Environment::ideal_dephasing;
    int env_width = 64;  // explicit environment: states per pointer
    int warmup = 64;     // effective-map iterations on the random local state
};

CycleConfig make_cycle(const ModelParams& m, int n);

// Engine setup plus a per-trial initial-state sampler.
struct Scenario {
    CycleConfig cycle;
    rvec target;  // initial diagonal GDM
    std::function<RunState(Rng&)> initial;
};

// Haar-random state carried `warmup` cycles along the chaotic map, so a trial
// starts from a typical pre-measurement local state.
LocalState chaotic_local(const CycleConfig& cfg, Rng& rng, int warmup);

// N-outcome walk from diag(probs). Ideal environment: H = c I with X_ij = k.
// Explicit (N = 2 only): env_width evenly spaced energy offsets per branch,
// disjoint supports and random phases.
Scenario build_generic(const ModelParams& m, const rvec& probs);

// ---- detector ---------------------------------------------------------------

struct DetectorSpec {
    int A = 16;            // even
    double E_dec = 4.0;    // in units of Delta E, so k = E_dec^2
    double B = 0.1;
    double hopping = 0.5;  // nearest-neighbour ring K_ab
    int a0 = 0;            // selected environment state
    int a1 = 1;            // partner of a0 in the active term
    double weight_a0 = 0.0;  // |C_a0|^2

    void validate() const;
};

struct Setup {
    HamiltonianSpec h;
    RunState initial;
};

Setup build_detector(const DetectorSpec& spec, Rng& rng);

struct ZParts {
    double dec;
    double meas;
};
ZParts detector_z_parts(const DetectorSpec& spec, const LocalState& local);

// decay exponent per cycle, |C_a0|^2 B^2 / E_dec
double detector_decay_rate(const DetectorSpec& spec);

struct ReleaseThreshold {
    double p_crit;       // beta dE^5 / (B^2 E_dec^3)
    bool triggerable;    // B^2 > beta dE^2 (dE/E_dec)^3
    double delta_star;   // eps / beta, at the current weight_a0
};
ReleaseThreshold detector_release_threshold(const DetectorSpec& spec, double beta, double dE = 1.0);

// Ideal-environment reduction: decay 0 -> 1 at detector_decay_rate, chaos
// k = E_dec^2. The local state starts at |0> offset by `seed_p` toward |1>
// (an exact pointer state is a fixed point of every step). seed_p <= 0 picks
// detector_seed_p.
Scenario detector_scenario(const ModelParams& m, const DetectorSpec& spec, double seed_p = 0.0);

// 1e-6 exp(-2 k s). The inverse shift flow stretches p by exp(2 k s), so only
// offsets well below that scale see the linearized pointer multiplier.
double detector_seed_p(const ModelParams& m, const DetectorSpec& spec);

// Local state at |0> and global diag(1, 0) held for `cycles`; true if the
// local state ever reaches p_1 > 1/2.
bool detector_released(const ModelParams& m, const DetectorSpec& spec, long long cycles, double seed_p = 0.0);

// ---- selector ---------------------------------------------------------------

// Local dimension n_object + 1 (detector |0>, |i>); environment index
// i * A + a over object (x) bath.
Setup build_selector(const DetectorSpec& spec, int n_object, const cvec& weights, Rng& rng);

// Post-release walk over the triggered detector states with target |D_i|^2.
Scenario selector_scenario(const ModelParams& m, const cvec& weights);

// ---- intermittency ----------------------------------------------------------

struct IntermittencySpec {
    double omega = -0.5;
    double dec_rate = 100.0;  // lambda of the (x, y) decay

    double k() const { return -2.0 * omega; }
    double R() const { return dec_rate / (2.0 * std::abs(k())); }
    double t_decay() const { return dec_rate / (k() * k()); }
    double t_decohere() const { return 1.0 / dec_rate; }
    double t_kinetic() const { return 1.0 / std::abs(k()); }
    void validate() const;
};

struct Riemann {
    double x, y, z;
};
Riemann to_riemann(const ReducedDensity& q);
ReducedDensity from_riemann(const Riemann& r);

// eigenvalues of the (z, y) block; real in the overdamped regime R >= 1
std::pair<cplx, cplx> intermittency_eigenvalues(const IntermittencySpec& spec);

ReducedDensity intermittency_flow(const IntermittencySpec& spec, const ReducedDensity& q0, double t);

// beta^(1/2) dE (dE/lambda)^(3/2)
double intermittency_kmin(double beta, double dec_rate, double dE = 1.0);
// dt / (beta T_decay)
double intermittency_delta_star(double beta, double t_decay, double dt = 1.0);

// z' = z exp(-1 / T_decay) +- beta (1 - z^2) / 2: kinetic decay toward the
// centre followed by one attraction step on z = Q_uu - Q_vv
StepRule intermittency_step(double beta, double t_decay);
// 1 - delta*, where an upward step no longer outruns the decay
double intermittency_edge(double beta, double t_decay);

// ---- spin -------------------------------------------------------------------

struct SpinOps {
    cmat jx, jy, jz;
    cmat j2;
};

// basis m = j, j-1, ..., -j
SpinOps spin_ops(double j);
// direct sum over j = 0, 1, ..., J
SpinOps spin_ops_extended(int J);

struct SpinSpec {
    double j = 1.0;
    double j_e = 1.0;
    double E = 1.0;
    bool extended = false;  // local space sums j = 0..J with J = j

    int dim() const;
    void validate() const;
};

// (1/3) E^2 j_e(j_e + 1) (<J^2> - |<J>|^2)
double spin_z(const SpinSpec& spec, const LocalState& local);
cvec spin_gradient(const SpinSpec& spec, const LocalState& local);
DecoherenceSpec spin_decoherence(const SpinSpec& spec);
// |m = j> rotated to polar angles (theta, phi)
LocalState spin_coherent(double j, double theta, double phi);
Eigen::Vector3d spin_expectation(const SpinOps& ops, const LocalState& local);

// ---- position ---------------------------------------------------------------

inline constexpr double kPlanckMassEv = 1.2e28;
inline constexpr double kPlanckLength = 1.6e-36;

struct PositionSpec {
    int n_sites = 8;
    double site_size = 1.0;       // R_1
    double universe_size = 8.0;   // R, regularization cutoff
    double coupling = 1.0;        // k = G m m'

    void validate() const;
};

// 1D ring, chord distance, D_aa = R_1
rmat position_distances(const PositionSpec& spec);
// V_au = k / D_au
HamiltonianSpec position_hamiltonian(const PositionSpec& spec);
// K_ab = (k^2 / N) sum_c D_ac^-1 D_bc^-1
rmat position_kernel(const PositionSpec& spec);
// sum_a p_a K_aa - sum_ab p_a p_b K_ab
double position_z(const PositionSpec& spec, const LocalState& local);
// X_ab = K_aa + K_bb - 2 K_ab, the general-mode form of position_z
DecoherenceSpec position_decoherence(const PositionSpec& spec);

struct Regularized {
    double M;  // (3/2) k / R
    double K;  // 3 (k / R)^2
    double kab(double d, double R) const { return (2.0 / 3.0) * M * M * (2.0 - d / R); }
};
Regularized position_regularized(const PositionSpec& spec);
// (2/3) M^2 Dbar / R with Dbar = sum p_a p_b D_ab
double position_z_regularized(const PositionSpec& spec, const LocalState& local);
double spread(const rmat& d, const LocalState& local);

// (m / M_p)^2 Dbar / R_p, mass in eV and spread in metres
double planck_z(double mass_ev, double spread_m);
// spread at which planck_z = 1
double localization_scale(double mass_ev);

Scenario position_scenario(const ModelParams& m, const PositionSpec& spec, const rvec& probs);

// ---- statistics ---------------------------------------------------------------

struct StatisticsEnsemble {
    std::vector<LocalState> states;
    double beta = 0.5;  // > 0 bosons, < 0 fermions

    void validate() const;
};

// Each step sweeps the pairs (i < j) in order with the symmetric pair map.
StatisticsEnsemble statistics_evolve(StatisticsEnsemble ensemble, int steps);
double mean_pair_overlap(const StatisticsEnsemble& ensemble);

}  // namespace mom
