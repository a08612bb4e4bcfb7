#include "mom/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace mom {

namespace {

constexpr double kPi = std::numbers::pi;

cvec random_phases(Rng& rng, int n, double magnitude) {
    cvec c(n);
    for (int a = 0; a < n; ++a) c[a] = std::polar(magnitude, rng.phase());
    return c;
}

// H = c I on an N x N environment; X_ij = 2 c^2 / N = k off the diagonal
rmat ideal_decohering(int n, double k) {
    return rmat::Identity(n, n) * std::sqrt(0.5 * k * n);
}

void check_probs(const rvec& p) {
    if (p.size() < 2) throw std::invalid_argument("need at least two outcome probabilities");
    if ((p.array() < 0.0).any()) throw std::invalid_argument("probabilities must be >= 0");
    if (std::abs(p.sum() - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
}

}  // namespace

CycleConfig make_cycle(const ModelParams& m, int n) {
    CycleConfig c;
    c.chaos = DecoherenceSpec::from_map_strength(m.k);
    c.shift.s = m.s;
    c.attraction.beta = m.beta;
    c.attraction.gamma = m.gamma;
    c.capture_epsilon = m.capture_epsilon;
    c.capture_window = m.capture_window;
    c.max_cycles = m.max_cycles;
    c.reverse_attraction = m.reverse_attraction;
    c.environment = m.environment;
    c.hamiltonian.decohering = ideal_decohering(n, m.k);
    return c;
}

LocalState chaotic_local(const CycleConfig& cfg, Rng& rng, int warmup) {
    const int n = cfg.hamiltonian.n();
    cvec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.complex_normal();
    LocalState s = LocalState::from(std::move(v));
    for (int w = 0; w < warmup; ++w) s = effective_map(cfg.chaos, cfg.shift, s);
    return s;
}

Scenario build_generic(const ModelParams& m, const rvec& probs) {
    check_probs(probs);
    const int n = static_cast<int>(probs.size());
    Scenario sc;
    sc.cycle = make_cycle(m, n);
    sc.target = probs;
    const int warmup = m.warmup;
    if (m.environment == Environment::ideal_dephasing) {
        sc.initial = [cfg = sc.cycle, probs, warmup](Rng& rng) {
            RunState s;
            s.local = chaotic_local(cfg, rng, warmup);
            s.global = GlobalState{probs.cwiseSqrt().asDiagonal().toDenseMatrix().cast<cplx>()};
            return s;
        };
        return sc;
    }
    if (n != 2) throw std::invalid_argument("explicit environment is implemented for two outcomes only");
    const int M = m.env_width;
    if (M < 1) throw std::invalid_argument("env_width must be >= 1");
    // Offsets 2 pi (j + 1/2) / M - pi make the two branches dephase
    // completely after one cycle; the common shift dc restores X_01 = k.
    rvec d(M);
    for (int j = 0; j < M; ++j) d[j] = 2.0 * kPi * (j + 0.5) / M - kPi;
    const double var = d.squaredNorm() / M;
    if (m.k < var) throw std::invalid_argument("explicit environment needs k >= offset variance");
    const double dc = std::sqrt(m.k - var);
    rmat h(2, 2 * M);
    for (int a = 0; a < 2 * M; ++a) {
        h(0, a) = 0.5 * (dc + d[a % M]);
        h(1, a) = -0.5 * (dc + d[a % M]);
    }
    sc.cycle.hamiltonian.decohering = h;
    sc.initial = [cfg = sc.cycle, probs, warmup, M](Rng& rng) {
        RunState s;
        s.local = chaotic_local(cfg, rng, warmup);
        cmat c = cmat::Zero(2, 2 * M);
        c.row(0).head(M) = random_phases(rng, M, std::sqrt(probs[0] / M)).transpose();
        c.row(1).tail(M) = random_phases(rng, M, std::sqrt(probs[1] / M)).transpose();
        s.global = GlobalState{c};
        return s;
    };
    return sc;
}

// ---- detector ---------------------------------------------------------------

void DetectorSpec::validate() const {
    if (A < 2 || A % 2 != 0) throw std::invalid_argument("detector: A must be even and >= 2");
    if (!(E_dec > 0.0)) throw std::invalid_argument("detector: E_dec must be positive");
    if (!(B >= 0.0)) throw std::invalid_argument("detector: B must be >= 0");
    if (a0 < 0 || a0 >= A || a1 < 0 || a1 >= A || a0 == a1)
        throw std::invalid_argument("detector: a0 and a1 must be distinct environment indices");
    if (!(weight_a0 >= 0.0 && weight_a0 < 1.0)) throw std::invalid_argument("detector: weight_a0 must lie in [0, 1)");
}

namespace {

// E_na = +-E_dec / 2 with alternating sign in a: X_01 = E_dec^2 and the
// environment average of each row vanishes.
rmat detector_decohering(int rows, int A, double e_dec) {
    rmat h(rows, A);
    for (int n = 0; n < rows; ++n)
        for (int a = 0; a < A; ++a) h(n, a) = 0.5 * e_dec * ((a + n) % 2 == 0 ? 1.0 : -1.0);
    return h;
}

cmat ring(int A, double hop) {
    cmat k = cmat::Zero(A, A);
    if (A < 2 || hop == 0.0) return k;
    for (int a = 0; a < A; ++a) {
        const int b = (a + 1) % A;
        k(a, b) += hop;
        k(b, a) += hop;
    }
    return k;
}

cvec detector_environment(const DetectorSpec& spec, Rng& rng) {
    const double rest = (1.0 - spec.weight_a0) / (spec.A - 1);
    cvec env = random_phases(rng, spec.A, std::sqrt(rest));
    env[spec.a0] = std::polar(std::sqrt(spec.weight_a0), rng.phase());
    return env;
}

}  // namespace

Setup build_detector(const DetectorSpec& spec, Rng& rng) {
    spec.validate();
    Setup out;
    out.h.decohering = detector_decohering(2, spec.A, spec.E_dec);
    if (spec.hopping != 0.0) out.h.env_kinetic = ring(spec.A, spec.hopping);
    if (spec.B != 0.0) out.h.active.push_back({1, spec.a1, 0, spec.a0, spec.B});
    out.initial.local = LocalState::pointer(2, 0);
    out.initial.global = GlobalState::product(out.initial.local, detector_environment(spec, rng));
    return out;
}

ZParts detector_z_parts(const DetectorSpec& spec, const LocalState& local) {
    const double p0 = local.prob(0);
    const double dec = 0.5 * spec.E_dec * spec.E_dec * 2.0 * p0 * (1.0 - p0);
    const double meas = spec.B * spec.B / (2.0 * spec.A) * (p0 * p0 + (1.0 - p0) * (1.0 - p0));
    return {dec, meas};
}

double detector_decay_rate(const DetectorSpec& spec) {
    return spec.weight_a0 * spec.B * spec.B / spec.E_dec;
}

ReleaseThreshold detector_release_threshold(const DetectorSpec& spec, double beta, double dE) {
    if (!(beta > 0.0)) throw std::invalid_argument("release threshold needs beta > 0");
    ReleaseThreshold r;
    r.p_crit = beta * std::pow(dE, 5) / (spec.B * spec.B * std::pow(spec.E_dec, 3));
    r.triggerable = spec.B * spec.B > beta * dE * dE * std::pow(dE / spec.E_dec, 3);
    r.delta_star = detector_decay_rate(spec) / beta;
    return r;
}

double detector_seed_p(const ModelParams& m, const DetectorSpec& spec) {
    return 1e-6 * std::exp(-2.0 * spec.E_dec * spec.E_dec * m.s);
}

Scenario detector_scenario(const ModelParams& m, const DetectorSpec& spec, double seed_p) {
    spec.validate();
    if (seed_p <= 0.0) seed_p = detector_seed_p(m, spec);
    ModelParams mm = m;
    mm.k = spec.E_dec * spec.E_dec;
    mm.environment = Environment::ideal_dephasing;
    Scenario sc;
    sc.cycle = make_cycle(mm, 2);
    sc.cycle.decay = DecayChannel{0, 1, detector_decay_rate(spec)};
    sc.target = rvec::Unit(2, 0);
    sc.initial = [seed_p](Rng& rng) {
        RunState s;
        cvec v(2);
        v[0] = std::sqrt(1.0 - seed_p);
        v[1] = std::polar(std::sqrt(seed_p), rng.phase());
        s.local = LocalState{v};
        cmat c = cmat::Zero(2, 2);
        c(0, 0) = 1.0;
        s.global = GlobalState{c};
        return s;
    };
    return sc;
}

bool detector_released(const ModelParams& m, const DetectorSpec& spec, long long cycles, double seed_p) {
    const Scenario sc = detector_scenario(m, spec, seed_p);
    Engine eng(sc.cycle);
    Rng rng(0, 0);
    RunState s = sc.initial(rng);
    for (long long c = 0; c < cycles; ++c) {
        eng.step(s);
        if (s.local.prob(1) > 0.5) return true;
    }
    return false;
}

// ---- selector ---------------------------------------------------------------

Setup build_selector(const DetectorSpec& spec, int n_object, const cvec& weights, Rng& rng) {
    spec.validate();
    if (n_object < 1 || weights.size() != n_object) throw std::invalid_argument("selector: weights must have n_object entries");
    if (std::abs(weights.squaredNorm() - 1.0) > 1e-9) throw std::invalid_argument("selector: sum |D_i|^2 must be 1");
    const int A = spec.A;
    const int cols = n_object * A;
    Setup out;
    out.h.decohering = detector_decohering(n_object + 1, cols, spec.E_dec);
    if (spec.hopping != 0.0) {
        cmat k = cmat::Zero(cols, cols);
        const cmat r = ring(A, spec.hopping);
        for (int i = 0; i < n_object; ++i) k.block(i * A, i * A, A, A) = r;
        out.h.env_kinetic = k;
    }
    if (spec.B != 0.0) {
        for (int i = 0; i < n_object; ++i) {
            // a_i distinct from a0, one per object state
            const int ai = (spec.a1 + i) % A == spec.a0 ? (spec.a1 + i + 1) % A : (spec.a1 + i) % A;
            out.h.active.push_back({i + 1, i * A + ai, 0, i * A + spec.a0, spec.B});
        }
    }
    const cvec env = detector_environment(spec, rng);
    cmat c = cmat::Zero(n_object + 1, cols);
    for (int i = 0; i < n_object; ++i) c.row(0).segment(i * A, A) = weights[i] * env.transpose();
    out.initial.local = LocalState::pointer(n_object + 1, 0);
    out.initial.global = GlobalState::from(std::move(c));
    return out;
}

Scenario selector_scenario(const ModelParams& m, const cvec& weights) {
    rvec p(weights.size() + 1);
    p[0] = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) p[i + 1] = std::norm(weights[i]);
    ModelParams mm = m;
    mm.environment = Environment::ideal_dephasing;
    return build_generic(mm, p);
}

// ---- intermittency ----------------------------------------------------------

void IntermittencySpec::validate() const {
    if (!(dec_rate > 0.0)) throw std::invalid_argument("intermittency: dec_rate must be positive");
    if (omega == 0.0) throw std::invalid_argument("intermittency: omega must be nonzero");
}

Riemann to_riemann(const ReducedDensity& q) {
    return {q.q(0, 1).real(), -q.q(0, 1).imag(), q.q(0, 0).real() - q.q(1, 1).real()};
}

ReducedDensity from_riemann(const Riemann& r) {
    cmat q(2, 2);
    q(0, 0) = 0.5 * (1.0 + r.z);
    q(1, 1) = 0.5 * (1.0 - r.z);
    q(0, 1) = cplx(r.x, -r.y);
    q(1, 0) = cplx(r.x, r.y);
    return {q};
}

namespace {

Eigen::Matrix2d zy_generator(const IntermittencySpec& s) {
    Eigen::Matrix2d g;
    g << 0.0, -s.k(), s.k(), -s.dec_rate;
    return g;
}

}  // namespace

std::pair<cplx, cplx> intermittency_eigenvalues(const IntermittencySpec& spec) {
    spec.validate();
    // alpha^2 + lambda alpha + k^2 = 0; the slow root is written without
    // cancellation as k^2 / (fast root)
    const double lam = spec.dec_rate, k = spec.k();
    const cplx disc = std::sqrt(cplx(lam * lam - 4.0 * k * k, 0.0));
    const cplx fast = -0.5 * (lam + disc);
    const cplx slow = k * k / fast;
    return {slow, fast};
}

ReducedDensity intermittency_flow(const IntermittencySpec& spec, const ReducedDensity& q0, double t) {
    spec.validate();
    if (q0.dim() != 2) throw std::invalid_argument("intermittency: two-level GDM expected");
    const Riemann r0 = to_riemann(q0);
    Eigen::EigenSolver<Eigen::Matrix2d> es(zy_generator(spec));
    const Eigen::Matrix2cd v = es.eigenvectors();
    const Eigen::Vector2cd lam = es.eigenvalues();
    Eigen::Vector2cd e;
    e << std::exp(lam[0] * t), std::exp(lam[1] * t);
    const Eigen::Matrix2cd prop = v * e.asDiagonal() * v.inverse();
    const Eigen::Vector2cd zy = prop * Eigen::Vector2cd(r0.z, r0.y);
    return from_riemann({r0.x * std::exp(-spec.dec_rate * t), zy[1].real(), zy[0].real()});
}

double intermittency_kmin(double beta, double dec_rate, double dE) {
    if (!(beta > 0.0 && dec_rate > 0.0)) throw std::invalid_argument("kmin: beta and dec_rate must be positive");
    return std::sqrt(beta) * dE * std::pow(dE / dec_rate, 1.5);
}

double intermittency_delta_star(double beta, double t_decay, double dt) {
    if (!(beta > 0.0 && t_decay > 0.0)) throw std::invalid_argument("delta*: beta and T_decay must be positive");
    return dt / (beta * t_decay);
}

StepRule intermittency_step(double beta, double t_decay) {
    const double keep = std::exp(-1.0 / t_decay);
    return [beta, keep](double z, bool up) { return z * keep + (up ? 0.5 : -0.5) * beta * (1.0 - z * z); };
}

double intermittency_edge(double beta, double t_decay) {
    return 1.0 - intermittency_delta_star(beta, t_decay);
}

// ---- spin -------------------------------------------------------------------

SpinOps spin_ops(double j) {
    const double twice = 2.0 * j;
    if (twice < 0.0 || std::abs(twice - std::round(twice)) > 1e-12) throw std::invalid_argument("spin: 2j must be a nonnegative integer");
    const int d = static_cast<int>(std::round(twice)) + 1;
    cmat jp = cmat::Zero(d, d), jz = cmat::Zero(d, d);
    for (int r = 0; r < d; ++r) {
        const double m = j - r;
        jz(r, r) = m;
        // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, row r-1 holds m+1
        if (r > 0) jp(r - 1, r) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    SpinOps o;
    o.jx = 0.5 * (jp + jp.adjoint());
    o.jy = cplx(0.0, -0.5) * (jp - jp.adjoint());
    o.jz = jz;
    o.j2 = o.jx * o.jx + o.jy * o.jy + o.jz * o.jz;
    return o;
}

SpinOps spin_ops_extended(int J) {
    if (J < 0) throw std::invalid_argument("spin: J must be >= 0");
    int d = 0;
    for (int j = 0; j <= J; ++j) d += 2 * j + 1;
    SpinOps o{cmat::Zero(d, d), cmat::Zero(d, d), cmat::Zero(d, d), cmat::Zero(d, d)};
    int off = 0;
    for (int j = 0; j <= J; ++j) {
        const SpinOps b = spin_ops(j);
        const int n = 2 * j + 1;
        o.jx.block(off, off, n, n) = b.jx;
        o.jy.block(off, off, n, n) = b.jy;
        o.jz.block(off, off, n, n) = b.jz;
        o.j2.block(off, off, n, n) = b.j2;
        off += n;
    }
    return o;
}

int SpinSpec::dim() const {
    if (!extended) return static_cast<int>(std::round(2.0 * j)) + 1;
    const int J = static_cast<int>(std::round(j));
    return (J + 1) * (J + 1);
}

void SpinSpec::validate() const {
    auto half_integer = [](double v) { return v >= 0.0 && std::abs(2.0 * v - std::round(2.0 * v)) < 1e-12; };
    if (!half_integer(j) || !half_integer(j_e)) throw std::invalid_argument("spin: 2j and 2j_e must be nonnegative integers");
    if (extended && std::abs(j - std::round(j)) > 1e-12) throw std::invalid_argument("spin: extended case needs integer J");
}

namespace {

SpinOps ops_for(const SpinSpec& spec) {
    return spec.extended ? spin_ops_extended(static_cast<int>(std::round(spec.j))) : spin_ops(spec.j);
}

double spin_prefactor(const SpinSpec& spec) {
    return spec.E * spec.E * spec.j_e * (spec.j_e + 1.0) / 3.0;
}

}  // namespace

Eigen::Vector3d spin_expectation(const SpinOps& o, const LocalState& s) {
    return {s.amps.dot(o.jx * s.amps).real(), s.amps.dot(o.jy * s.amps).real(), s.amps.dot(o.jz * s.amps).real()};
}

namespace {

double spin_z_with(const SpinOps& o, double c, const LocalState& local) {
    if (local.dim() != o.jz.rows()) throw std::invalid_argument("spin: local dimension mismatch");
    const double j2 = local.amps.dot(o.j2 * local.amps).real();
    return c * std::max(0.0, j2 - spin_expectation(o, local).squaredNorm());
}

cvec spin_gradient_with(const SpinOps& o, double c, const LocalState& local) {
    if (local.dim() != o.jz.rows()) throw std::invalid_argument("spin: local dimension mismatch");
    const Eigen::Vector3d w = spin_expectation(o, local);
    const cvec& s = local.amps;
    const cvec dot = w[0] * (o.jx * s) + w[1] * (o.jy * s) + w[2] * (o.jz * s);
    return 2.0 * c * (o.j2 * s - 2.0 * dot);
}

}  // namespace

double spin_z(const SpinSpec& spec, const LocalState& local) {
    spec.validate();
    return spin_z_with(ops_for(spec), spin_prefactor(spec), local);
}

cvec spin_gradient(const SpinSpec& spec, const LocalState& local) {
    spec.validate();
    return spin_gradient_with(ops_for(spec), spin_prefactor(spec), local);
}

DecoherenceSpec spin_decoherence(const SpinSpec& spec) {
    spec.validate();
    auto ops = std::make_shared<const SpinOps>(ops_for(spec));
    const double c = spin_prefactor(spec);
    DecoherenceSpec d;
    d.mode = ZMode::custom;
    d.custom_z = [ops, c](const LocalState& s) { return spin_z_with(*ops, c, s); };
    d.custom_gradient = [ops, c](const LocalState& s) { return spin_gradient_with(*ops, c, s); };
    d.custom_strength = 2.0 * c;
    return d;
}

LocalState spin_coherent(double j, double theta, double phi) {
    const SpinOps o = spin_ops(j);
    auto expi = [](const cmat& h, double angle) {
        Eigen::SelfAdjointEigenSolver<cmat> es(h);
        const cvec ph = (es.eigenvalues().cast<cplx>() * cplx(0.0, -angle)).array().exp();
        return cmat(es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
    };
    const cvec top = cvec::Unit(o.jz.rows(), 0);
    return LocalState::from(expi(o.jz, phi) * (expi(o.jy, theta) * top));
}

// ---- position ---------------------------------------------------------------

void PositionSpec::validate() const {
    if (n_sites < 2) throw std::invalid_argument("position: n_sites must be >= 2");
    if (!(site_size > 0.0 && universe_size > 0.0)) throw std::invalid_argument("position: sizes must be positive");
    if (!(coupling > 0.0)) throw std::invalid_argument("position: coupling must be positive");
}

rmat position_distances(const PositionSpec& spec) {
    spec.validate();
    const int n = spec.n_sites;
    const double radius = n * spec.site_size / (2.0 * kPi);
    rmat d(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            d(a, b) = a == b ? spec.site_size : std::max(spec.site_size, 2.0 * radius * std::sin(kPi * std::abs(a - b) / n));
    return d;
}

HamiltonianSpec position_hamiltonian(const PositionSpec& spec) {
    HamiltonianSpec h;
    h.decohering = spec.coupling * position_distances(spec).cwiseInverse();
    return h;
}

rmat position_kernel(const PositionSpec& spec) {
    const rmat inv = position_distances(spec).cwiseInverse();
    return spec.coupling * spec.coupling / spec.n_sites * inv * inv.transpose();
}

double position_z(const PositionSpec& spec, const LocalState& local) {
    const rmat k = position_kernel(spec);
    if (local.dim() != k.rows()) throw std::invalid_argument("position: local dimension mismatch");
    const rvec p = local.probs();
    return std::max(0.0, p.dot(k.diagonal()) - p.dot(k * p));
}

DecoherenceSpec position_decoherence(const PositionSpec& spec) {
    const rmat k = position_kernel(spec);
    const int n = static_cast<int>(k.rows());
    rmat x(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) x(a, b) = a == b ? 0.0 : std::max(0.0, k(a, a) + k(b, b) - 2.0 * k(a, b));
    x = 0.5 * (x + x.transpose()).eval();
    return DecoherenceSpec::general(std::move(x));
}

Regularized position_regularized(const PositionSpec& spec) {
    spec.validate();
    const double ratio = spec.coupling / spec.universe_size;
    return {1.5 * ratio, 3.0 * ratio * ratio};
}

double spread(const rmat& d, const LocalState& local) {
    const rvec p = local.probs();
    return p.dot(d * p);
}

double position_z_regularized(const PositionSpec& spec, const LocalState& local) {
    const Regularized r = position_regularized(spec);
    return (2.0 / 3.0) * r.M * r.M * spread(position_distances(spec), local) / spec.universe_size;
}

double planck_z(double mass_ev, double spread_m) {
    const double ratio = mass_ev / kPlanckMassEv;
    return ratio * ratio * spread_m / kPlanckLength;
}

double localization_scale(double mass_ev) {
    if (!(mass_ev > 0.0)) throw std::invalid_argument("localization_scale: mass must be positive");
    const double ratio = kPlanckMassEv / mass_ev;
    return kPlanckLength * ratio * ratio;
}

Scenario position_scenario(const ModelParams& m, const PositionSpec& spec, const rvec& probs) {
    check_probs(probs);
    if (probs.size() != spec.n_sites) throw std::invalid_argument("position: probs must have n_sites entries");
    Scenario sc;
    ModelParams mm = m;
    mm.environment = Environment::ideal_dephasing;
    sc.cycle = make_cycle(mm, spec.n_sites);
    sc.cycle.hamiltonian = position_hamiltonian(spec);
    sc.cycle.chaos = position_decoherence(spec);
    sc.cycle.shift.closed_form_n2 = false;
    sc.target = probs;
    const int warmup = m.warmup;
    sc.initial = [cfg = sc.cycle, probs, warmup](Rng& rng) {
        RunState s;
        s.local = chaotic_local(cfg, rng, warmup);
        s.global = GlobalState{probs.cwiseSqrt().asDiagonal().toDenseMatrix().cast<cplx>()};
        return s;
    };
    return sc;
}

// ---- statistics ---------------------------------------------------------------

void StatisticsEnsemble::validate() const {
    if (states.size() < 2) throw std::invalid_argument("statistics: need at least two states");
    for (const auto& s : states)
        if (s.dim() != states.front().dim()) throw std::invalid_argument("statistics: states must share one space");
    if (!(std::abs(beta) <= 1.0)) throw std::invalid_argument("statistics: |beta| must be <= 1");
}

StatisticsEnsemble statistics_evolve(StatisticsEnsemble e, int steps) {
    e.validate();
    const std::size_t n = e.states.size();
    for (int t = 0; t < steps; ++t)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                auto [u, v] = attract_pair(e.states[i], e.states[j], e.beta);
                e.states[i] = LocalState{u.amps / u.amps.norm()};
                e.states[j] = LocalState{v.amps / v.amps.norm()};
            }
    return e;
}

double mean_pair_overlap(const StatisticsEnsemble& e) {
    double acc = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < e.states.size(); ++i)
        for (std::size_t j = i + 1; j < e.states.size(); ++j) {
            acc += std::norm(e.states[i].amps.dot(e.states[j].amps));
            ++cnt;
        }
    return cnt ? acc / cnt : 0.0;
}

}  // namespace mom
