#include "mom/runs.hpp"

#include "mom/ensemble.hpp"

#include "json.hpp"

#include <omp.h>

#include <cmath>

namespace mom {

using nlohmann::json;

namespace {

template <class Trial>
std::vector<TrialRecord> each_trial(const RunConfig& c, Trial trial) {
    std::vector<TrialRecord> out(static_cast<std::size_t>(c.trials));
    const int nt = c.threads > 0 ? c.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt)
    for (long long t = 0; t < c.trials; ++t) {
        TrialRecord r;
        r.trial = t;
        try {
            Rng rng(c.seed, static_cast<std::uint64_t>(t));
            trial(rng, r);
        } catch (const std::exception& e) {
            r.error = true;
            r.censored = true;
            r.message = e.what();
        }
        out[static_cast<std::size_t>(t)] = r;
    }
    return out;
}

LocalState haar(Rng& rng, int dim) {
    cvec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.complex_normal();
    return LocalState::from(std::move(v));
}

EnsembleReport plain_report(const std::vector<TrialRecord>& recs) {
    EnsembleReport r;
    r.trials = static_cast<long long>(recs.size());
    double t = 0.0;
    for (const auto& x : recs) {
        if (x.error) ++r.errors;
        t += static_cast<double>(x.cycles);
    }
    r.mean_time = r.trials ? t / static_cast<double>(r.trials) : 0.0;
    r.mean_time_lower = r.mean_time;
    return r;
}

double mean_final(const std::vector<TrialRecord>& recs) {
    double acc = 0.0;
    long long n = 0;
    for (const auto& x : recs)
        if (!x.error) {
            acc += x.final_z;
            ++n;
        }
    return n ? acc / static_cast<double>(n) : 0.0;
}

RunOutput run_engine(const RunConfig& c) {
    const Scenario sc = make_scenario(c);
    RunOutput out;
    out.records = run_parallel(sc, c.trials, c.seed, c.threads);
    double delta = 0.0;
    try {
        delta = capture_threshold(sc.cycle);
    } catch (const GammaSubcritical&) {
        delta = 0.0;
    }
    const std::vector<double> target(sc.target.data(), sc.target.data() + sc.target.size());
    out.report = born_report(out.records, target, delta);
    json extra = {{"map_strength", sc.cycle.chaos.map_strength()}, {"beta", sc.cycle.attraction.beta}};
    if (sc.cycle.attraction.beta > 0.0) {
        extra["measurement_time_estimate"] = measurement_time_estimate(sc.cycle.chaos.map_strength(), sc.cycle.attraction.beta);
        extra["min_measurement_time"] = min_measurement_time(sc.cycle.attraction.beta, sc.cycle.rho);
    }
    if (c.scenario == ScenarioKind::detector && c.model.beta > 0.0) {
        const ReleaseThreshold th = detector_release_threshold(c.detector, c.model.beta);
        extra["decay_rate"] = detector_decay_rate(c.detector);
        extra["p_crit"] = th.p_crit;
        extra["triggerable"] = th.triggerable;
        extra["delta_star"] = th.delta_star;
    }
    out.extra = extra.dump();
    return out;
}

RunOutput run_intermittency(const RunConfig& c) {
    const auto& in = c.intermittency;
    in.spec.validate();
    const double beta = c.model.beta;
    if (!(beta > 0.0)) throw std::invalid_argument("intermittency: model.beta must be positive");
    const double t_decay = in.spec.t_decay();
    const double edge = intermittency_edge(beta, t_decay);
    if (!(edge > 0.0)) throw std::invalid_argument("intermittency: delta* >= 1, no reflecting interval");
    const StepRule step = intermittency_step(beta, t_decay);
    const int bins = in.bins;
    std::vector<std::vector<double>> counts(static_cast<std::size_t>(c.trials));
    RunOutput out;
    out.records = each_trial(c, [&](Rng& rng, TrialRecord& r) {
        std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
        double z = std::clamp(in.z0, -edge, edge);
        for (long long n = 0; n < in.steps; ++n) {
            const double y = step(z, rng.uniform() < 0.5);
            if (std::abs(y) <= edge) z = y;
            const auto b = std::clamp<long long>(static_cast<long long>((z + 1.0) * 0.5 * bins), 0, bins - 1);
            h[static_cast<std::size_t>(b)] += 1.0;
        }
        r.outcome = z > 0.0 ? 0 : 1;
        r.cycles = in.steps;
        r.final_z = z;
        counts[static_cast<std::size_t>(r.trial)] = std::move(h);
    });
    Histogram hist{-1.0, 1.0, std::vector<double>(static_cast<std::size_t>(bins), 0.0)};
    double total = 0.0;
    for (const auto& h : counts)
        for (std::size_t b = 0; b < h.size(); ++b) {
            hist.density[b] += h[b];
            total += h[b];
        }
    double central = 0.0;
    for (std::size_t b = 0; b < hist.density.size(); ++b) {
        if (std::abs(hist.center(b)) < 0.5) central += hist.density[b];
        if (total > 0.0) hist.density[b] /= total * hist.width();
    }
    out.histogram = hist;
    out.report = plain_report(out.records);
    const auto [slow, fast] = intermittency_eigenvalues(in.spec);
    out.extra = json{{"t_decay", t_decay},
                     {"delta_star", 1.0 - edge},
                     {"alpha_plus", slow.real()},
                     {"alpha_minus", fast.real()},
                     {"k_min", intermittency_kmin(beta, in.spec.dec_rate)},
                     {"central_occupancy", total > 0.0 ? central / total : 0.0}}
                    .dump();
    return out;
}

RunOutput run_spin(const RunConfig& c) {
    const SpinSpec& sp = c.spin.spec;
    sp.validate();
    const DecoherenceSpec chaos = spin_decoherence(sp);
    ShiftSpec shift;
    shift.s = c.model.s;
    const SpinOps ops = sp.extended ? spin_ops_extended(static_cast<int>(std::round(sp.j))) : spin_ops(sp.j);
    const int dim = sp.dim();
    const double jmax = sp.j;
    RunOutput out;
    out.records = each_trial(c, [&](Rng& rng, TrialRecord& r) {
        LocalState s = haar(rng, dim);
        for (int n = 0; n < c.spin.steps; ++n) s = effective_map(chaos, shift, s);
        r.outcome = -1;
        r.cycles = c.spin.steps;
        r.final_z = jmax > 0.0 ? spin_expectation(ops, s).norm() / jmax : 0.0;
    });
    out.report = plain_report(out.records);
    out.extra = json{{"mean_alignment", mean_final(out.records)}, {"map_strength", chaos.map_strength()}}.dump();
    return out;
}

RunOutput run_statistics(const RunConfig& c) {
    const auto& st = c.statistics;
    std::vector<double> initial(static_cast<std::size_t>(c.trials), 0.0);
    RunOutput out;
    out.records = each_trial(c, [&](Rng& rng, TrialRecord& r) {
        StatisticsEnsemble e;
        e.beta = st.beta;
        for (int i = 0; i < st.n_states; ++i) e.states.push_back(haar(rng, st.dim));
        initial[static_cast<std::size_t>(r.trial)] = mean_pair_overlap(e);
        e = statistics_evolve(std::move(e), st.steps);
        r.outcome = -1;
        r.cycles = st.steps;
        r.final_z = mean_pair_overlap(e);
    });
    double init = 0.0;
    for (double v : initial) init += v;
    out.report = plain_report(out.records);
    out.extra = json{{"mean_initial_overlap", c.trials ? init / static_cast<double>(c.trials) : 0.0},
                     {"mean_final_overlap", mean_final(out.records)},
                     {"beta", st.beta}}
                    .dump();
    return out;
}

}  // namespace

RunOutput run_config(const RunConfig& c) {
    switch (c.scenario) {
        case ScenarioKind::intermittency: return run_intermittency(c);
        case ScenarioKind::spin: return run_spin(c);
        case ScenarioKind::statistics: return run_statistics(c);
        default: return run_engine(c);
    }
}

}  // namespace mom
