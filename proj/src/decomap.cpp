#include "mom/decomap.hpp"

#include <cmath>
#include <numbers>

namespace mom {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFixedGuard = 1e-14;
constexpr double kStepTol = 1e-9;
constexpr int kMaxHalvings = 24;

// unprojected complex gradient 2 s_i dZ/dp_i
cvec raw_gradient(const DecoherenceSpec& spec, const LocalState& local) {
    const cvec& s = local.amps;
    switch (spec.mode) {
        case ZMode::symmetric: {
            cvec g(s.size());
            for (Eigen::Index i = 0; i < s.size(); ++i) g[i] = 2.0 * spec.K * (1.0 - 2.0 * std::norm(s[i])) * s[i];
            return g;
        }
        case ZMode::general: {
            const rvec p = local.probs();
            const rvec dz = spec.x * p;
            cvec g(s.size());
            for (Eigen::Index i = 0; i < s.size(); ++i) g[i] = 2.0 * dz[i] * s[i];
            return g;
        }
        case ZMode::custom:
            if (!spec.custom_gradient) throw std::invalid_argument("custom decoherence without gradient");
            return spec.custom_gradient(local);
    }
    return cvec::Zero(s.size());
}

cvec project(const cvec& g, const cvec& psi) {
    return g - psi.dot(g).real() * psi;
}

cvec flow_rhs(const DecoherenceSpec& spec, const cvec& psi) {
    return -project(raw_gradient(spec, LocalState{psi}), psi);
}

cvec rk4(const DecoherenceSpec& spec, const cvec& y, double h) {
    const cvec k1 = flow_rhs(spec, y);
    const cvec k2 = flow_rhs(spec, y + 0.5 * h * k1);
    const cvec k3 = flow_rhs(spec, y + 0.5 * h * k2);
    const cvec k4 = flow_rhs(spec, y + h * k3);
    cvec out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return out / out.norm();
}

// one accepted interval of length h, bisected until step doubling agrees
cvec advance(const DecoherenceSpec& spec, const cvec& y, double h, int depth) {
    const cvec full = rk4(spec, y, h);
    const cvec mid = rk4(spec, y, 0.5 * h);
    const cvec half = rk4(spec, mid, 0.5 * h);
    if ((full - half).norm() <= kStepTol) return half;
    if (depth >= kMaxHalvings)
        throw IntegrationError("shift_flow: step halving failed to reach local tolerance 1e-9");
    return advance(spec, advance(spec, y, 0.5 * h, depth + 1), 0.5 * h, depth + 1);
}

}  // namespace

DecoherenceSpec DecoherenceSpec::symmetric(double K) {
    DecoherenceSpec d;
    d.mode = ZMode::symmetric;
    d.K = K;
    return d;
}

DecoherenceSpec DecoherenceSpec::general(rmat x) {
    DecoherenceSpec d;
    d.mode = ZMode::general;
    d.x = std::move(x);
    d.validate();
    return d;
}

DecoherenceSpec DecoherenceSpec::from_hamiltonian(const HamiltonianSpec& h, double dt) {
    const int N = h.n(), A = h.a();
    rmat x = rmat::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            double acc = 0.0;
            for (int a = 0; a < A; ++a) {
                const double d = h.decohering(i, a) - h.decohering(j, a);
                acc += d * d;
            }
            x(i, j) = acc * dt * dt / A;
        }
    return general(std::move(x));
}

double DecoherenceSpec::map_strength() const {
    switch (mode) {
        case ZMode::symmetric:
            return 4.0 * K;
        case ZMode::general: {
            // X = (1 - delta) E^2 is the symmetric case with K = E^2 / 2
            double m = 0.0;
            for (Eigen::Index i = 0; i < x.rows(); ++i)
                for (Eigen::Index j = 0; j < x.cols(); ++j)
                    if (i != j) m = std::max(m, x(i, j));
            return 2.0 * m;
        }
        case ZMode::custom:
            return custom_strength;
    }
    return 0.0;
}

void DecoherenceSpec::validate() const {
    if (mode == ZMode::symmetric && !(K >= 0.0)) throw std::invalid_argument("symmetric strength must be >= 0");
    if (mode == ZMode::general) {
        if (x.rows() != x.cols() || x.rows() < 2) throw std::invalid_argument("X must be square with N >= 2");
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (x(i, i) != 0.0) throw std::invalid_argument("X_ii must be zero");
            for (Eigen::Index j = 0; j < x.cols(); ++j) {
                if (x(i, j) < 0.0) throw std::invalid_argument("X_ij must be >= 0");
                if (x(i, j) != x(j, i)) throw std::invalid_argument("X must be symmetric");
            }
        }
    }
    if (mode == ZMode::custom && (!custom_z || !custom_gradient))
        throw std::invalid_argument("custom decoherence needs Z and gradient callbacks");
}

double z_value(const DecoherenceSpec& spec, const LocalState& local) {
    switch (spec.mode) {
        case ZMode::symmetric: {
            double acc = 0.0;
            for (int i = 0; i < local.dim(); ++i) {
                const double p = local.prob(i);
                acc += p * (1.0 - p);
            }
            return spec.K * acc;
        }
        case ZMode::general: {
            const rvec p = local.probs();
            return 0.5 * p.dot(spec.x * p);
        }
        case ZMode::custom:
            return spec.custom_z(local);
    }
    return 0.0;
}

cvec tangent_gradient(const DecoherenceSpec& spec, const LocalState& local) {
    return project(raw_gradient(spec, local), local.amps);
}

rvec tangent_gradient_r(double K, const rvec& r) {
    const double s4 = r.array().pow(4).sum();
    rvec g(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) g[i] = 4.0 * K * r[i] * (s4 - r[i] * r[i]);
    return g;
}

LocalState bare_map(const DecoherenceSpec& spec, const LocalState& local) {
    // Explicit projection of the gradient against psi is the Gram-Schmidt
    // step, so the S6 - S4^2 normalization never divides by round-off.
    const cvec g = tangent_gradient(spec, local);
    const double theta = g.norm();
    if (theta < kFixedGuard) return local;
    cvec out = local.amps * std::cos(theta) + g * (std::sin(theta) / theta);
    return LocalState{out / out.norm()};
}

LocalState shift_flow(const DecoherenceSpec& spec, const ShiftSpec& shift, const LocalState& local,
                      Direction dir) {
    if (shift.steps_per_unit < 16) throw std::invalid_argument("shift: steps_per_unit must be >= 16");
    const double s = dir == Direction::forward ? shift.s : -shift.s;
    if (s == 0.0) return local;
    if (tangent_gradient(spec, local).norm() < kFixedGuard) return local;
    if (shift.closed_form_n2 && spec.mode == ZMode::symmetric && local.dim() == 2)
        return n2::from_angle(n2::flow(n2::to_angle(local), 4.0 * spec.K * s), local);
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(s) * shift.steps_per_unit)));
    const double h = s / steps;
    cvec y = local.amps;
    for (int i = 0; i < steps; ++i) y = advance(spec, y, h, 0);
    return LocalState{y};
}

LocalState effective_map(const DecoherenceSpec& spec, const ShiftSpec& shift, const LocalState& local) {
    if (shift.closed_form_n2 && spec.mode == ZMode::symmetric && local.dim() == 2)
        return n2::from_angle(n2::effective(n2::to_angle(local), 4.0 * spec.K, shift.s), local);
    const LocalState back = shift_flow(spec, shift, local, Direction::inverse);
    return shift_flow(spec, shift, bare_map(spec, back), Direction::forward);
}

namespace n2 {

double Angle::phi() const { return static_cast<double>(n) * kPi + r; }

Angle normalize(long long n, double r) {
    const double m = std::round(r / kPi);
    if (m != 0.0) {
        n += static_cast<long long>(m);
        r -= m * kPi;
    }
    return {n, r};
}

Angle to_angle(const LocalState& s) {
    const double a = std::abs(s.amps[0]), b = std::abs(s.amps[1]);
    if (a <= b) return {0, 2.0 * std::atan2(a, b)};
    return {1, -2.0 * std::atan2(b, a)};
}

LocalState from_angle(const Angle& ang, const LocalState& phases) {
    const double sh = std::sin(0.5 * ang.r), ch = std::cos(0.5 * ang.r);
    double r0 = 0.0, r1 = 0.0;
    // sin/cos of n*pi/2 + r/2
    switch (((ang.n % 4) + 4) % 4) {
        case 0: r0 = sh; r1 = ch; break;
        case 1: r0 = ch; r1 = -sh; break;
        case 2: r0 = -sh; r1 = -ch; break;
        default: r0 = -ch; r1 = sh; break;
    }
    auto unit = [](cplx z) { const double m = std::abs(z); return m > 0.0 ? z / m : cplx(1.0); };
    cvec v(2);
    v[0] = r0 * unit(phases.amps[0]);
    v[1] = r1 * unit(phases.amps[1]);
    return LocalState{v};
}

Angle bare(const Angle& a, double k) {
    // phi + k cos(phi) sin(phi), and sin(2 phi) has period pi
    return normalize(a.n, a.r + 0.5 * k * std::sin(2.0 * a.r));
}

Angle flow(const Angle& a, double ks) {
    // tan(phi(s)) = tan(phi0) exp(-k s); r stays in its half-cell
    return {a.n, std::atan2(std::sin(a.r) * std::exp(-ks), std::cos(a.r))};
}

Angle effective(const Angle& a, double k, double s) {
    return flow(bare(flow(a, -k * s), k), k * s);
}

double bare_phi(double phi, double k) { return phi + k * std::cos(phi) * std::sin(phi); }

double flow_phi(double phi, double ks) {
    const double base = 2.0 * kPi * std::round((phi - std::atan2(std::sin(phi), std::cos(phi))) / (2.0 * kPi));
    return base + std::atan2(std::sin(phi) * std::exp(-ks), std::cos(phi));
}

double p_of_phi(double phi) {
    const double s = std::sin(0.5 * phi);
    return s * s;
}

double p_closed(double p0, double k, double s) {
    const double u = 0.25 * std::acos(std::tanh(z0_of_p(p0) + k * s));
    const double v = std::sin(u);
    return v * v;
}

double z0_of_p(double p) { return std::atanh(std::cos(4.0 * std::asin(std::sqrt(p)))); }

}  // namespace n2

}  // namespace mom
