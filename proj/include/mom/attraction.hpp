#pragma once

#include "mom/hilbert.hpp"

#include <utility>

namespace mom {

struct AttractionParams {
    double beta = 0.0;   // global side, [-1, 1]
    double gamma = 1.0;  // local side, [0, 1]
    double beta0 = 1.0;

    void validate() const;
};

// |A'> = sqrt(1 + beta(1-z)) P|A> + sqrt(1 - beta z)(1-P)|A>, P = |B><B|
LocalState attract_state_on_state(const LocalState& a_state, const LocalState& b_state, double beta);

struct AttractResult {
    LocalState state;
    bool degenerate = false;  // z or Gamma too small; map was the identity
};

// Pull of the local state toward Q with strength params.gamma. The Q psi
// coefficient is fixed by norm preservation for mixed Q; it equals the
// familiar sqrt(1 + gamma(1 - z)) for a pure projector.
AttractResult attract_density_on_state(const LocalState& local, const ReducedDensity& q,
                                       const AttractionParams& params);

// Psi' = sqrt(1 + beta(1-z)) P Psi + sqrt(1 - beta z)(1-P) Psi, P = psi psi^dag (x) I
GlobalState attract_local_on_global(const GlobalState& global, const LocalState& local, double beta);

double strength_rule(int dim_intersection, int dim_mapped, double beta0);

// z' = z + beta z (1 - z)
inline double overlap_recursion(double z, double beta) { return z + beta * z * (1.0 - z); }

// near-orthogonal growth rate of the symmetric pairwise map
double pair_growth_rate(double beta);
// R in z' = R^2 z for the symmetric pairwise map
double pair_overlap_factor(double z, double beta);
// both states pulled toward each other in one step
std::pair<LocalState, LocalState> attract_pair(const LocalState& u, const LocalState& v, double beta);

}  // namespace mom
