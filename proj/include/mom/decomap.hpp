#pragma once

#include "mom/hilbert.hpp"

#include <functional>
#include <stdexcept>

namespace mom {

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ZMode { general, symmetric, custom };

// Z on the local state. Strength convention: symmetric Z = K sum p(1-p);
// the N=2 angle map then reads phi' = phi + k cos(phi) sin(phi) with k = 4K.
struct DecoherenceSpec {
    ZMode mode = ZMode::symmetric;
    rmat x;              // general: Z = 1/2 sum_ij X_ij p_i p_j
    double K = 0.0;      // symmetric
    std::function<double(const LocalState&)> custom_z;
    // complex gradient dZ/d(conj psi) scaled so that for p-only Z it equals
    // 2 s_i dZ/dp_i; it is projected onto the tangent space by the caller
    std::function<cvec(const LocalState&)> custom_gradient;
    double custom_strength = 0.0;

    static DecoherenceSpec symmetric(double K);
    static DecoherenceSpec from_map_strength(double k) { return symmetric(k / 4.0); }
    static DecoherenceSpec general(rmat x);
    // X_ij = (1/A) sum_a (H_ia - H_ja)^2 (dt)^2
    static DecoherenceSpec from_hamiltonian(const HamiltonianSpec& h, double dt = 1.0);

    // map strength k (lambda_c^2 in the chaotic-regime test)
    double map_strength() const;
    void validate() const;
};

struct ShiftSpec {
    double s = 1.0;
    int steps_per_unit = 64;
    // N=2 symmetric maps use the exact angle solution instead of RK4
    bool closed_form_n2 = true;
};

enum class Direction { forward, inverse };

double z_value(const DecoherenceSpec& spec, const LocalState& local);

// Tangent gradient as a complex vector: component i is (grad_perp Z)_i times
// the phase of s_i, orthogonal to psi in the real inner product.
cvec tangent_gradient(const DecoherenceSpec& spec, const LocalState& local);

// R-space form 4K R_i (S4 - R_i^2) for real nonnegative R_i = |s_i|
// (symmetric mode).
rvec tangent_gradient_r(double K, const rvec& r);

LocalState bare_map(const DecoherenceSpec& spec, const LocalState& local);

LocalState shift_flow(const DecoherenceSpec& spec, const ShiftSpec& shift, const LocalState& local,
                      Direction dir);

LocalState effective_map(const DecoherenceSpec& spec, const ShiftSpec& shift, const LocalState& local);

namespace n2 {

// phi = n*pi + r with r in [-pi/2, pi/2]; p_0 = sin^2(phi/2). Keeping the
// offset from the nearest pointer angle separately gives the same relative
// precision near both pointer states.
struct Angle {
    long long n = 0;
    double r = 0.0;

    double phi() const;
};

Angle to_angle(const LocalState& s);
// overwrites the magnitudes of s, keeps its phases
LocalState from_angle(const Angle& a, const LocalState& phases);
Angle normalize(long long n, double r);

Angle bare(const Angle& a, double k);
Angle flow(const Angle& a, double ks);
Angle effective(const Angle& a, double k, double s);

// plain-angle forms for checks
double bare_phi(double phi, double k);
double flow_phi(double phi, double ks);
double p_of_phi(double phi);

// p(s) = sin^2(acos(tanh(z0 + k s)) / 4), valid for p in [0, 1/2]
double p_closed(double p0, double k, double s);
double z0_of_p(double p);

}  // namespace n2

}  // namespace mom
