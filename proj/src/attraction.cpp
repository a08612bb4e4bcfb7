#include "mom/attraction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mom {

namespace {

constexpr double kZFloor = 1e-15;
constexpr double kGammaFloor = 1e-30;

void check_beta(double beta) {
    if (!(std::abs(beta) <= 1.0)) throw std::invalid_argument("attraction strength must lie in [-1, 1]");
}

}  // namespace

void AttractionParams::validate() const {
    check_beta(beta);
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
}

LocalState attract_state_on_state(const LocalState& a_state, const LocalState& b_state, double beta) {
    check_beta(beta);
    if (a_state.dim() != b_state.dim()) throw std::invalid_argument("attract_state_on_state: dimension mismatch");
    const cplx ov = b_state.amps.dot(a_state.amps);
    const double z = std::norm(ov);
    const cvec par = b_state.amps * ov;
    const double ca = std::sqrt(1.0 + beta * (1.0 - z));
    const double cb = std::sqrt(1.0 - beta * z);
    return LocalState{ca * par + cb * (a_state.amps - par)};
}

AttractResult attract_density_on_state(const LocalState& local, const ReducedDensity& q,
                                       const AttractionParams& params) {
    const double g = params.gamma;
    const cvec u = q.q * local.amps;
    const double z = local.amps.dot(u).real();
    const double gam = u.squaredNorm();
    if (z < kZFloor || gam < kGammaFloor) return {local, true};
    const double r = z / gam;
    const double a = r * std::sqrt(std::max(0.0, 1.0 + g * (gam / z - z)));
    const double b = std::sqrt(std::max(0.0, 1.0 - g * z));
    return {LocalState{a * u + b * (local.amps - r * u)}, false};
}

GlobalState attract_local_on_global(const GlobalState& global, const LocalState& local, double beta) {
    check_beta(beta);
    if (beta == 0.0) return global;
    if (global.n() != local.dim()) throw std::invalid_argument("attract_local_on_global: dimension mismatch");
    const Eigen::RowVectorXcd chi = local.amps.adjoint() * global.amps;
    const double z = chi.squaredNorm();
    const cmat par = local.amps * chi;
    const double ca = std::sqrt(1.0 + beta * (1.0 - z));
    const double cb = std::sqrt(1.0 - beta * z);
    return GlobalState{ca * par + cb * (global.amps - par)};
}

double strength_rule(int dim_intersection, int dim_mapped, double beta0) {
    if (dim_intersection < 1 || dim_intersection > dim_mapped)
        throw std::invalid_argument("strength_rule: need 1 <= dim_intersection <= dim_mapped");
    return std::clamp(beta0 * dim_intersection / dim_mapped, 0.0, 1.0);
}

double pair_growth_rate(double beta) {
    const double s = std::sqrt(1.0 + beta);
    return 4.0 * s * (s - 1.0);
}

double pair_overlap_factor(double z, double beta) {
    const double a = std::sqrt(1.0 + beta * (1.0 - z));
    const double b = std::sqrt(1.0 - beta * z);
    return (a - b) * (a - b) * z + 2.0 * b * (a - b) + b * b;
}

std::pair<LocalState, LocalState> attract_pair(const LocalState& u, const LocalState& v, double beta) {
    return {attract_state_on_state(u, v, beta), attract_state_on_state(v, u, beta)};
}

}  // namespace mom
