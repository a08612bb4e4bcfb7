#include "mom/analysis.hpp"

#include "mom/decomap.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double x, double lo, double hi) {
    const double w = hi - lo;
    double y = std::fmod(x - lo, w);
    if (y < 0.0) y += w;
    return lo + y;
}

double step_orbit(const OrbitMap& m, double x) {
    double y = m.f(x);
    if (!std::isfinite(y)) throw OrbitDiverged("orbit produced a non-finite iterate");
    if (m.periodic) return wrap(y, m.lo, m.hi);
    if (y < m.lo || y > m.hi) throw OrbitDiverged("orbit left the map domain");
    return y;
}

// d/dphi of atan2(sin(phi) e^-ks, cos(phi))
double flow_slope(double phi, double ks) {
    const double c = std::cos(phi), s = std::sin(phi), e = std::exp(-ks);
    return e / (c * c + s * s * e * e);
}

}  // namespace

OrbitMap phi_map(double k, double x0) {
    OrbitMap m;
    m.f = [k](double p) { return n2::bare_phi(p, k); };
    m.df = [k](double p) { return 1.0 + k * std::cos(2.0 * p); };
    m.x0 = x0;
    m.lo = 0.0;
    m.hi = kTwoPi;
    m.periodic = true;
    return m;
}

OrbitMap effective_phi_map(double k, double s, double x0) {
    OrbitMap m;
    const double ks = k * s;
    m.f = [k, ks](double p) { return n2::flow_phi(n2::bare_phi(n2::flow_phi(p, -ks), k), ks); };
    m.df = [k, ks](double p) {
        const double a = n2::flow_phi(p, -ks);
        const double b = n2::bare_phi(a, k);
        return flow_slope(b, ks) * (1.0 + k * std::cos(2.0 * a)) * flow_slope(p, -ks);
    };
    m.x0 = x0;
    m.lo = 0.0;
    m.hi = kTwoPi;
    m.periodic = true;
    return m;
}

double liapunov(const OrbitMap& map, long long transient, long long length) {
    if (length < 1 || transient < 0) throw std::invalid_argument("liapunov: need length >= 1 and transient >= 0");
    double x = map.x0;
    for (long long t = 0; t < transient; ++t) x = step_orbit(map, x);
    double acc = 0.0;
    for (long long t = 0; t < length; ++t) {
        const double d = std::abs(map.df(x));
        acc += std::log(std::max(d, std::numeric_limits<double>::min()));
        x = step_orbit(map, x);
    }
    return acc / static_cast<double>(length);
}

Histogram invariant_distribution(const OrbitMap& map, int bins, long long length, long long transient) {
    if (bins < 1 || length < 1) throw std::invalid_argument("invariant_distribution: need bins >= 1 and length >= 1");
    Histogram h{map.lo, map.hi, std::vector<double>(static_cast<std::size_t>(bins), 0.0)};
    double x = map.x0;
    for (long long t = 0; t < transient; ++t) x = step_orbit(map, x);
    for (long long t = 0; t < length; ++t) {
        const auto b = std::clamp<long long>(static_cast<long long>((x - h.lo) / h.width()), 0, bins - 1);
        h.density[static_cast<std::size_t>(b)] += 1.0;
        x = step_orbit(map, x);
    }
    for (double& d : h.density) d /= static_cast<double>(length) * h.width();
    return h;
}

OrbitStats orbit_stats(const OrbitMap& map, int bins, long long transient, long long length) {
    return {liapunov(map, transient, length), invariant_distribution(map, bins, length, transient), transient, length};
}

double tv_from_uniform(const Histogram& h) {
    const double u = 1.0 / (h.hi - h.lo);
    double acc = 0.0;
    for (double d : h.density) acc += std::abs(d - u) * h.width();
    return 0.5 * acc;
}

double concentration_excess(double k, double s, long long length, double threshold, double phi0) {
    n2::Angle a = n2::normalize(0, phi0);
    long long hits = 0;
    for (long long t = 0; t < length; ++t) {
        a = n2::effective(a, k, s);
        // distance to the nearest pointer state is sin^2(r/2)
        const double h = std::sin(0.5 * a.r);
        if (h * h > threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(length);
}

// ---- Feller walks -----------------------------------------------------------

StepRule multiplicative_step(double beta) {
    return [beta](double x, bool up) { return x + (up ? 1.0 : -1.0) * beta * x * (1.0 - x); };
}

StepRule constant_step(double dz) {
    return [dz](double x, bool up) { return x + (up ? dz : -dz); };
}

FellerResult feller_absorption(const FellerSpec& spec) {
    if (!spec.step) throw std::invalid_argument("feller: step rule missing");
    if (spec.trials < 1) throw std::invalid_argument("feller: trials must be >= 1");
    if (!(spec.lower < spec.upper)) throw std::invalid_argument("feller: need lower < upper");
    FellerResult r;
    if (spec.barrier == Barrier::absorbing) {
        long long up = 0;
        double steps = 0.0;
        for (int t = 0; t < spec.trials; ++t) {
            Rng rng(spec.seed, static_cast<std::uint64_t>(t));
            double x = spec.x0;
            long long n = 0;
            // edges are tested with a relative tolerance, so a walk on an
            // exact grid is not held back by rounding of x
            const double tol = 1e-12;
            while (x > spec.lower + tol && x < spec.upper - tol && n < spec.max_steps) {
                x = spec.step(x, rng.uniform() < spec.p_up);
                ++n;
            }
            if (x > spec.lower + tol && x < spec.upper - tol) {
                ++r.censored;
                continue;
            }
            ++r.absorbed;
            steps += static_cast<double>(n);
            if (x >= spec.upper - tol) ++up;
        }
        if (r.absorbed > 0) {
            r.prob_upper = static_cast<double>(up) / r.absorbed;
            r.stderr_upper = std::sqrt(r.prob_upper * (1.0 - r.prob_upper) / r.absorbed);
            r.mean_steps = steps / r.absorbed;
        }
        return r;
    }
    // reflecting: moves past an edge are replaced by staying put
    Histogram h{spec.lower, spec.upper, std::vector<double>(static_cast<std::size_t>(spec.bins), 0.0)};
    double total = 0.0;
    long long above = 0;
    const double mid = 0.5 * (spec.lower + spec.upper);
    for (int t = 0; t < spec.trials; ++t) {
        Rng rng(spec.seed, static_cast<std::uint64_t>(t));
        double x = spec.x0;
        for (long long n = 0; n < spec.max_steps; ++n) {
            const double y = spec.step(x, rng.uniform() < spec.p_up);
            if (y >= spec.lower && y <= spec.upper) x = y;
            const auto b = std::clamp<long long>(static_cast<long long>((x - h.lo) / h.width()), 0, spec.bins - 1);
            h.density[static_cast<std::size_t>(b)] += 1.0;
            if (x > mid) ++above;
            total += 1.0;
        }
    }
    for (double& d : h.density) d /= total * h.width();
    r.occupancy = std::move(h);
    r.prob_upper = static_cast<double>(above) / total;
    r.mean_steps = static_cast<double>(spec.max_steps);
    return r;
}

// ---- reports ----------------------------------------------------------------

TrialRecord to_record(long long trial, const MeasurementResult& m) {
    TrialRecord r;
    r.trial = trial;
    r.outcome = m.status == Status::collapsed ? m.outcome.pointer_index : -1;
    r.cycles = m.outcome.cycles_elapsed;
    r.final_z = m.outcome.final_z;
    r.censored = m.status != Status::collapsed;
    return r;
}

double binomial_test(long long k, long long n, double p) {
    if (n <= 0) return 1.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
    const double observed = boost::math::pdf(dist, static_cast<double>(k));
    // sum over outcomes no more likely than the observed one
    const double slack = 1.0 + 1e-7;
    double acc = 0.0;
    for (long long i = 0; i <= n; ++i) {
        const double d = boost::math::pdf(dist, static_cast<double>(i));
        if (d <= observed * slack) acc += d;
    }
    return std::min(1.0, acc);
}

double chi_square(const std::vector<long long>& counts, const std::vector<double>& probs, bool yates) {
    long long n = 0;
    for (long long c : counts) n += c;
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double e = probs[i] * static_cast<double>(n);
        if (e <= 0.0) continue;
        double d = std::abs(static_cast<double>(counts[i]) - e);
        if (yates) d = std::max(0.0, d - 0.5);
        stat += d * d / e;
    }
    return stat;
}

double chi_square_sf(double stat, int dof) {
    if (dof < 1) return 1.0;
    const boost::math::chi_squared_distribution<double> dist(dof);
    return boost::math::cdf(boost::math::complement(dist, std::max(0.0, stat)));
}

EnsembleReport born_report(const std::vector<TrialRecord>& records, const std::vector<double>& target, double delta) {
    EnsembleReport rep;
    const std::size_t n = target.size();
    rep.outcome_counts.assign(n, 0);
    rep.target_probs = target;
    rep.deviation_bound = delta;
    rep.trials = static_cast<long long>(records.size());
    double t_sum = 0.0, t_all = 0.0;
    for (const auto& r : records) {
        if (r.error) {
            ++rep.errors;
            continue;
        }
        t_all += static_cast<double>(r.cycles);
        if (r.censored || r.outcome < 0 || static_cast<std::size_t>(r.outcome) >= n) {
            ++rep.censored;
            continue;
        }
        ++rep.outcome_counts[static_cast<std::size_t>(r.outcome)];
        t_sum += static_cast<double>(r.cycles);
    }
    long long done = 0;
    for (long long c : rep.outcome_counts) done += c;
    rep.frequencies.assign(n, 0.0);
    rep.corrected_probs.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (done > 0) rep.frequencies[i] = static_cast<double>(rep.outcome_counts[i]) / static_cast<double>(done);
        // the absorbing edges sit at delta and 1 - delta
        rep.corrected_probs[i] = n == 2 ? std::clamp((target[i] - delta) / (1.0 - 2.0 * delta), 0.0, 1.0) : target[i];
        rep.max_deviation = std::max(rep.max_deviation, std::abs(rep.frequencies[i] - target[i]));
    }
    const bool yates = n == 2;
    int dof = -1;
    for (double p : target)
        if (p > 0.0) ++dof;
    rep.chi_square = chi_square(rep.outcome_counts, target, yates);
    rep.chi_square_p = chi_square_sf(rep.chi_square, dof);
    rep.chi_square_corrected = chi_square(rep.outcome_counts, rep.corrected_probs, yates);
    if (n == 2) rep.binomial_p = binomial_test(rep.outcome_counts[0], done, target[0]);
    const long long valid = rep.trials - rep.errors;
    rep.mean_time = done > 0 ? t_sum / static_cast<double>(done) : 0.0;
    rep.mean_time_lower = valid > 0 ? t_all / static_cast<double>(valid) : 0.0;
    return rep;
}

}  // namespace mom
