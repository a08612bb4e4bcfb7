#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mom {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

class EvolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Observer state in the pointer basis.
struct LocalState {
    cvec amps;

    int dim() const { return static_cast<int>(amps.size()); }
    double prob(int i) const { return std::norm(amps[i]); }
    rvec probs() const { return amps.cwiseAbs2(); }

    // Normalizes; throws std::invalid_argument for N < 2 or zero vector.
    static LocalState from(cvec v);
    static LocalState pointer(int n, int i);
    // real amplitudes (sqrt(p_0), sqrt(p_1), ...)
    static LocalState from_probs(const rvec& p);
};

// C_ia over |i> (x) |a>, row i = pointer index, column a = environment.
struct GlobalState {
    cmat amps;

    int n() const { return static_cast<int>(amps.rows()); }
    int a() const { return static_cast<int>(amps.cols()); }

    static GlobalState from(cmat c);
    static GlobalState product(const LocalState& local, const cvec& env);
};

struct ReducedDensity {
    cmat q;

    int dim() const { return static_cast<int>(q.rows()); }
    double diag(int i) const { return q(i, i).real(); }
};

// B (|bra><ket| + |ket><bra|) on the flattened index i*A + a.
struct ActiveTerm {
    int bra_i, bra_a;
    int ket_i, ket_a;
    double coupling;
};

struct HamiltonianSpec {
    rmat decohering;                     // N x A
    std::optional<cmat> env_kinetic;     // A x A, acts as I (x) K
    std::vector<ActiveTerm> active;
    std::optional<cmat> local_kinetic;   // N x N, acts as L (x) I

    int n() const { return static_cast<int>(decohering.rows()); }
    int a() const { return static_cast<int>(decohering.cols()); }
    bool diagonal() const;
    // Dense NA x NA operator, index i*A + a. Test and fallback use only.
    cmat assemble() const;
};

inline constexpr int kDenseCap = 4096;

ReducedDensity reduce(const GlobalState& global);

struct Moments {
    double z;
    double gamma2;
};
Moments overlap_moments(const LocalState& local, const ReducedDensity& q);

rvec effective_hamiltonian(const HamiltonianSpec& h);

// exp(-i H dt), split into connected blocks of the coupling graph. Singletons
// are phase factors; every other block is exponentiated densely once.
class Propagator {
public:
    Propagator(const HamiltonianSpec& h, double dt);

    void apply(GlobalState& g) const;
    GlobalState operator()(const GlobalState& g) const;

    bool diagonal_only() const { return blocks_.empty(); }
    int largest_block() const { return largest_; }

private:
    struct Block {
        std::vector<int> index;
        cmat u;
    };
    int n_, a_;
    cvec phase_;  // per flattened index; unused slots for block members
    std::vector<Block> blocks_;
    int largest_ = 1;
};

GlobalState evolve_unitary(const GlobalState& global, const HamiltonianSpec& h, double dt);

double norm2(const LocalState& s);
double norm2(const GlobalState& g);

}  // namespace mom
