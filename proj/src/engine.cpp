#include "mom/engine.hpp"

#include <algorithm>
#include <cmath>

namespace mom {

void CycleConfig::validate() const {
    chaos.validate();
    attraction.validate();
    if (max_cycles < 1) throw std::invalid_argument("max_cycles must be >= 1");
    if (!(capture_epsilon > 0.0 && capture_epsilon < 0.1)) throw std::invalid_argument("capture_epsilon must lie in (0, 0.1)");
    if (capture_window < 1) throw std::invalid_argument("capture_window must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (environment == Environment::ideal_dephasing && !hamiltonian.diagonal())
        throw std::invalid_argument("ideal environment supports only a diagonal decohering Hamiltonian");
    if (decay) {
        if (environment != Environment::ideal_dephasing)
            throw std::invalid_argument("decay channel needs the ideal environment");
        const int n = hamiltonian.n();
        if (decay->from < 0 || decay->from >= n || decay->to < 0 || decay->to >= n || decay->from == decay->to)
            throw std::invalid_argument("decay channel indices out of range");
        if (!(decay->rate >= 0.0)) throw std::invalid_argument("decay rate must be >= 0");
    }
}

namespace {

void apply_decay(cmat& q, const DecayChannel& d) {
    const double keep = std::exp(-d.rate);
    const double moved = (1.0 - keep) * q(d.from, d.from).real();
    const double half = std::exp(-0.5 * d.rate);
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (j == d.from) continue;
        q(d.from, j) *= half;
        q(j, d.from) *= half;
    }
    q(d.from, d.from) *= keep;
    q(d.to, d.to) += moved;
}

}  // namespace

GlobalState purify(const ReducedDensity& q) {
    Eigen::SelfAdjointEigenSolver<cmat> es(q.q);
    rvec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    cmat c = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    return GlobalState{c / c.norm()};
}

Engine::Engine(CycleConfig cfg)
    : cfg_(std::move(cfg)),
      prop_(cfg_.hamiltonian, cfg_.dt),
      beta_(std::max(0.0, cfg_.attraction.beta)) {
    cfg_.validate();
    const int N = cfg_.hamiltonian.n(), A = cfg_.hamiltonian.a();
    damp_ = rmat::Ones(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            double x = 0.0;
            for (int a = 0; a < A; ++a) {
                const double d = cfg_.hamiltonian.decohering(i, a) - cfg_.hamiltonian.decohering(j, a);
                x += d * d;
            }
            damp_(i, j) = std::exp(-0.5 * x / A * cfg_.dt * cfg_.dt);
        }
    fast2_ = cfg_.hamiltonian.n() == 2 && cfg_.hamiltonian.diagonal() && cfg_.chaos.mode == ZMode::symmetric &&
             cfg_.shift.closed_form_n2;
}

bool Engine::step(RunState& s) const {
    const bool degenerate = fast2_ ? step_two_level(s) : step_general(s);
    ++s.cycle_index;
    return degenerate;
}

void Engine::dephase(GlobalState& g) const {
    ReducedDensity q = reduce(g);
    q.q = q.q.cwiseProduct(damp_.cast<cplx>());
    if (cfg_.decay) apply_decay(q.q, *cfg_.decay);
    g = purify(q);
}

bool Engine::step_general(RunState& s) const {
    if (cfg_.environment == Environment::ideal_dephasing) dephase(s.global);
    else prop_.apply(s.global);
    s.local = effective_map(cfg_.chaos, cfg_.shift, s.local);
    bool degenerate = false;
    auto pull_local = [&] {
        if (cfg_.attraction.gamma == 0.0) return;
        AttractResult r = attract_density_on_state(s.local, reduce(s.global), cfg_.attraction);
        degenerate = r.degenerate;
        s.local = std::move(r.state);
    };
    auto pull_global = [&] { s.global = attract_local_on_global(s.global, s.local, beta_); };
    if (cfg_.reverse_attraction) {
        pull_global();
        pull_local();
    } else {
        pull_local();
        pull_global();
    }
    s.local.amps /= s.local.amps.norm();
    s.global.amps /= s.global.amps.norm();
    return degenerate;
}

// Same cycle as step_general for N=2, diagonal H and the closed-form shift,
// written without temporaries.
bool Engine::step_two_level(RunState& s) const {
    if (cfg_.environment == Environment::ideal_dephasing) {
        cplx* c = s.global.amps.data();
        const int A = s.global.a();
        double q00 = 0.0, q11 = 0.0;
        cplx q01 = 0.0;
        for (int a = 0; a < A; ++a) {
            q00 += std::norm(c[2 * a]);
            q11 += std::norm(c[2 * a + 1]);
            q01 += c[2 * a] * std::conj(c[2 * a + 1]);
        }
        q01 *= damp_(0, 1);
        if (cfg_.decay) {
            const DecayChannel& d = *cfg_.decay;
            const double keep = std::exp(-d.rate);
            double& qf = d.from == 0 ? q00 : q11;
            double& qt = d.from == 0 ? q11 : q00;
            qt += (1.0 - keep) * qf;
            qf *= keep;
            q01 *= std::exp(-0.5 * d.rate);
        }
        // sqrt of a 2x2 positive matrix: (Q + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
        const double sd = std::sqrt(std::max(0.0, q00 * q11 - std::norm(q01)));
        const double t = std::sqrt(q00 + q11 + 2.0 * sd);
        if (A != 2) s.global.amps.resize(2, 2);
        c = s.global.amps.data();
        c[0] = (q00 + sd) / t;
        c[1] = std::conj(q01) / t;
        c[2] = q01 / t;
        c[3] = (q11 + sd) / t;
    } else {
        prop_.apply(s.global);
    }
    const double k = 4.0 * cfg_.chaos.K;
    s.local = n2::from_angle(n2::effective(n2::to_angle(s.local), k, cfg_.shift.s), s.local);

    cplx* psi = s.local.amps.data();
    cplx* c = s.global.amps.data();  // column-major: c[i + 2a]
    const int A = s.global.a();
    const double g = cfg_.attraction.gamma;
    bool degenerate = false;

    auto pull_local = [&] {
        if (g == 0.0) return;
        double q00 = 0.0, q11 = 0.0;
        cplx q01 = 0.0;
        for (int a = 0; a < A; ++a) {
            q00 += std::norm(c[2 * a]);
            q11 += std::norm(c[2 * a + 1]);
            q01 += c[2 * a] * std::conj(c[2 * a + 1]);
        }
        const cplx u0 = q00 * psi[0] + q01 * psi[1];
        const cplx u1 = std::conj(q01) * psi[0] + q11 * psi[1];
        const double z = (std::conj(psi[0]) * u0 + std::conj(psi[1]) * u1).real();
        const double gam = std::norm(u0) + std::norm(u1);
        if (z < 1e-15 || gam < 1e-30) {
            degenerate = true;
            return;
        }
        const double r = z / gam;
        const double ca = r * std::sqrt(std::max(0.0, 1.0 + g * (gam / z - z)));
        const double cb = std::sqrt(std::max(0.0, 1.0 - g * z));
        psi[0] = ca * u0 + cb * (psi[0] - r * u0);
        psi[1] = ca * u1 + cb * (psi[1] - r * u1);
    };
    auto pull_global = [&] {
        if (beta_ == 0.0) return;
        double z = 0.0;
        for (int a = 0; a < A; ++a) z += std::norm(std::conj(psi[0]) * c[2 * a] + std::conj(psi[1]) * c[2 * a + 1]);
        const double ca = std::sqrt(1.0 + beta_ * (1.0 - z));
        const double cb = std::sqrt(1.0 - beta_ * z);
        for (int a = 0; a < A; ++a) {
            const cplx chi = std::conj(psi[0]) * c[2 * a] + std::conj(psi[1]) * c[2 * a + 1];
            c[2 * a] = cb * c[2 * a] + (ca - cb) * psi[0] * chi;
            c[2 * a + 1] = cb * c[2 * a + 1] + (ca - cb) * psi[1] * chi;
        }
    };
    if (cfg_.reverse_attraction) {
        pull_global();
        pull_local();
    } else {
        pull_local();
        pull_global();
    }
    const double nl = std::sqrt(std::norm(psi[0]) + std::norm(psi[1]));
    psi[0] /= nl;
    psi[1] /= nl;
    double ng = 0.0;
    for (int i = 0; i < 2 * A; ++i) ng += std::norm(c[i]);
    ng = std::sqrt(ng);
    for (int i = 0; i < 2 * A; ++i) c[i] /= ng;
    return degenerate;
}

int Engine::update_capture(RunState& s) const {
    const double eps = cfg_.capture_epsilon;
    int il = 0, iq = 0;
    double pl = -1.0, pq = -1.0;
    for (int i = 0; i < s.local.dim(); ++i) {
        const double p = s.local.prob(i);
        if (p > pl) { pl = p; il = i; }
        const double q = s.global.amps.row(i).squaredNorm();
        if (q > pq) { pq = q; iq = i; }
    }
    const bool inside = 1.0 - pl < eps && 1.0 - pq < eps && il == iq;
    if (!inside) {
        s.captured_streak = 0;
        s.streak_index = -1;
        return -1;
    }
    if (s.streak_index == il) {
        ++s.captured_streak;
    } else {
        s.captured_streak = 1;
        s.streak_index = il;
    }
    return s.captured_streak >= cfg_.capture_window ? il : -1;
}

MeasurementResult Engine::run(RunState s, const CycleObserver& obs) const {
    MeasurementResult res;
    if (cfg_.chaos.map_strength() < cfg_.rho) {
        res.status = Status::subcritical;
        res.outcome.cycles_elapsed = 0;
        res.outcome.final_z = overlap_moments(s.local, reduce(s.global)).z;
        res.outcome.deviation_flags.push_back("subcritical");
        return res;
    }
    long long degenerate = 0;
    const long long start = s.cycle_index;
    while (s.cycle_index - start < cfg_.max_cycles) {
        if (step(s)) ++degenerate;
        if (obs) obs(s);
        const int idx = update_capture(s);
        if (idx >= 0) {
            res.status = Status::collapsed;
            res.outcome.pointer_index = idx;
            break;
        }
    }
    res.outcome.cycles_elapsed = s.cycle_index - start;
    res.outcome.final_z = overlap_moments(s.local, reduce(s.global)).z;
    if (degenerate > 0) res.outcome.deviation_flags.push_back("degenerate_overlap");
    if (cfg_.reverse_attraction) res.outcome.deviation_flags.push_back("reversed_order");
    return res;
}

RunState step(const RunState& state, const CycleConfig& cfg) {
    RunState s = state;
    Engine(cfg).step(s);
    return s;
}

MeasurementResult run_measurement(const RunState& initial, const CycleConfig& cfg) {
    return Engine(cfg).run(initial);
}

double capture_threshold(const CycleConfig& cfg) {
    if (cfg.attraction.gamma < 1.0)
        throw GammaSubcritical("capture needs gamma = 1; weaker local attraction loses to the chaotic map");
    const double l2 = cfg.chaos.map_strength();
    return 1.0 / (l2 * l2);
}

double min_measurement_time(double beta, double rho) {
    if (!(beta > 0.0)) throw std::invalid_argument("min_measurement_time: beta must be positive");
    const double l = std::log(1.0 + rho);
    return 4.0 * l * l / (beta * beta);
}

double measurement_time_estimate(double lambda2, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("measurement_time_estimate: beta must be positive");
    const double l = 2.0 * std::log(1.0 + lambda2);
    return l * l / (beta * beta);
}

double beta_star(double t_star_over_dt, double rho) {
    return 2.0 * std::log(1.0 + rho) * std::sqrt(1.0 / t_star_over_dt);
}

}  // namespace mom
