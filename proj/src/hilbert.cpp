#include "mom/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <numeric>
#include <string>

namespace mom {

LocalState LocalState::from(cvec v) {
    if (v.size() < 2) throw std::invalid_argument("local state needs N >= 2");
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("local state has zero norm");
    return LocalState{v / n};
}

LocalState LocalState::pointer(int n, int i) {
    cvec v = cvec::Zero(n);
    v[i] = 1.0;
    return from(std::move(v));
}

LocalState LocalState::from_probs(const rvec& p) {
    cvec v(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) v[i] = std::sqrt(std::max(p[i], 0.0));
    return from(std::move(v));
}

GlobalState GlobalState::from(cmat c) {
    if (c.rows() < 2 || c.cols() < 1) throw std::invalid_argument("global state needs N >= 2, A >= 1");
    const double n = c.norm();
    if (!(n > 0.0)) throw std::invalid_argument("global state has zero norm");
    return GlobalState{c / n};
}

GlobalState GlobalState::product(const LocalState& local, const cvec& env) {
    return from(local.amps * env.transpose());
}

bool HamiltonianSpec::diagonal() const {
    return !env_kinetic && !local_kinetic && active.empty();
}

cmat HamiltonianSpec::assemble() const {
    const int N = n(), A = a(), D = N * A;
    cmat h = cmat::Zero(D, D);
    for (int i = 0; i < N; ++i)
        for (int x = 0; x < A; ++x) h(i * A + x, i * A + x) += decohering(i, x);
    if (env_kinetic) {
        const cmat& k = *env_kinetic;
        for (int i = 0; i < N; ++i)
            for (int x = 0; x < A; ++x)
                for (int y = 0; y < A; ++y) h(i * A + x, i * A + y) += k(x, y);
    }
    if (local_kinetic) {
        const cmat& l = *local_kinetic;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int x = 0; x < A; ++x) h(i * A + x, j * A + x) += l(i, j);
    }
    for (const auto& t : active) {
        const int r = t.bra_i * A + t.bra_a, c = t.ket_i * A + t.ket_a;
        if (r == c) {
            h(r, r) += t.coupling;
        } else {
            h(r, c) += t.coupling;
            h(c, r) += t.coupling;
        }
    }
    return h;
}

ReducedDensity reduce(const GlobalState& global) {
    cmat q = global.amps * global.amps.adjoint();
    // exact hermiticity; the product is only equal up to rounding
    q = 0.5 * (q + q.adjoint()).eval();
    return ReducedDensity{std::move(q)};
}

Moments overlap_moments(const LocalState& local, const ReducedDensity& q) {
    const cvec u = q.q * local.amps;
    return {local.amps.dot(u).real(), u.squaredNorm()};
}

rvec effective_hamiltonian(const HamiltonianSpec& h) {
    return h.decohering.rowwise().mean();
}

namespace {

struct Dsu {
    std::vector<int> p;
    explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void join(int x, int y) { p[find(x)] = find(y); }
};

}  // namespace

Propagator::Propagator(const HamiltonianSpec& h, double dt) : n_(h.n()), a_(h.a()) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_unitary: dt must be positive");
    const int N = n_, A = a_, D = N * A;
    auto idx = [A](int i, int x) { return i * A + x; };

    Dsu dsu(D);
    cvec diag(D);
    for (int i = 0; i < N; ++i)
        for (int x = 0; x < A; ++x) diag[idx(i, x)] = h.decohering(i, x);
    if (h.env_kinetic) {
        const cmat& k = *h.env_kinetic;
        for (int x = 0; x < A; ++x)
            for (int y = 0; y < A; ++y) {
                if (k(x, y) == cplx(0.0)) continue;
                for (int i = 0; i < N; ++i) {
                    if (x == y) diag[idx(i, x)] += k(x, x);
                    else dsu.join(idx(i, x), idx(i, y));
                }
            }
    }
    if (h.local_kinetic) {
        const cmat& l = *h.local_kinetic;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                if (l(i, j) == cplx(0.0)) continue;
                for (int x = 0; x < A; ++x) {
                    if (i == j) diag[idx(i, x)] += l(i, i);
                    else dsu.join(idx(i, x), idx(j, x));
                }
            }
    }
    for (const auto& t : h.active) {
        const int r = idx(t.bra_i, t.bra_a), c = idx(t.ket_i, t.ket_a);
        if (r == c) diag[r] += t.coupling;
        else if (t.coupling != 0.0) dsu.join(r, c);
    }

    std::vector<std::vector<int>> members(D);
    for (int r = 0; r < D; ++r) members[dsu.find(r)].push_back(r);

    phase_ = cvec::Ones(D);
    cmat full;  // assembled lazily, only if some block is non-trivial
    for (auto& m : members) {
        if (m.empty()) continue;
        if (m.size() == 1) {
            phase_[m[0]] = std::exp(cplx(0.0, -dt) * diag[m[0]]);
            continue;
        }
        if (static_cast<int>(m.size()) > kDenseCap)
            throw EvolveError("evolve_unitary: coupled block of dimension " + std::to_string(m.size()) +
                              " exceeds the dense cap " + std::to_string(kDenseCap));
        if (full.size() == 0) full = h.assemble();
        const int b = static_cast<int>(m.size());
        cmat hb(b, b);
        for (int r = 0; r < b; ++r)
            for (int c = 0; c < b; ++c) hb(r, c) = full(m[r], m[c]);
        Eigen::SelfAdjointEigenSolver<cmat> es(hb);
        if (es.info() != Eigen::Success) throw EvolveError("evolve_unitary: eigensolver failed");
        cvec ph(b);
        for (int r = 0; r < b; ++r) ph[r] = std::exp(cplx(0.0, -dt * es.eigenvalues()[r]));
        cmat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        largest_ = std::max(largest_, b);
        blocks_.push_back({std::move(m), std::move(u)});
    }
}

void Propagator::apply(GlobalState& g) const {
    if (g.n() != n_ || g.a() != a_) throw std::invalid_argument("propagator: dimension mismatch");
    cplx* c = g.amps.data();
    // Eigen storage is column-major: element (i, x) sits at i + x*N
    auto at = [&](int flat) -> cplx& { return c[(flat / a_) + (flat % a_) * n_]; };
    for (const auto& b : blocks_) {
        const int m = static_cast<int>(b.index.size());
        cvec v(m);
        for (int r = 0; r < m; ++r) v[r] = at(b.index[r]);
        const cvec w = b.u * v;
        for (int r = 0; r < m; ++r) at(b.index[r]) = w[r];
    }
    for (int i = 0; i < n_; ++i)
        for (int x = 0; x < a_; ++x) {
            const int f = i * a_ + x;
            if (phase_[f] != cplx(1.0)) g.amps(i, x) *= phase_[f];
        }
}

GlobalState Propagator::operator()(const GlobalState& g) const {
    GlobalState out = g;
    apply(out);
    return out;
}

GlobalState evolve_unitary(const GlobalState& global, const HamiltonianSpec& h, double dt) {
    return Propagator(h, dt)(global);
}

double norm2(const LocalState& s) { return s.amps.squaredNorm(); }
double norm2(const GlobalState& g) { return g.amps.squaredNorm(); }

}  // namespace mom
