#include "mom/config.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace mom {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += "; ";
        s += v[i];
    }
    return s;
}

// Pulls typed fields out of one JSON object, collecting every problem
// instead of stopping at the first.
class Reader {
public:
    Reader(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {}

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    template <class T>
    void get(const std::string& key, T& out, bool required = false) {
        if (!has(key)) {
            if (required) fail(key, "is required");
            return;
        }
        const json& v = obj_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::invalid_argument("");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw std::invalid_argument("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("");
            }
            out = v.get<T>();
        } catch (const std::exception&) {
            fail(key, "has the wrong type");
        }
    }

    void get_vec(const std::string& key, rvec& out, bool required = false) {
        if (!has(key)) {
            if (required) fail(key, "is required");
            return;
        }
        const json& v = obj_.at(key);
        if (!v.is_array() || v.empty()) {
            fail(key, "must be a non-empty array of numbers");
            return;
        }
        rvec r(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                fail(key, "must be a non-empty array of numbers");
                return;
            }
            r[static_cast<Eigen::Index>(i)] = v[i].get<double>();
        }
        out = r;
    }

    const json* object(const std::string& key) {
        if (!has(key)) return nullptr;
        const json& v = obj_.at(key);
        if (!v.is_object()) {
            fail(key, "must be an object");
            return nullptr;
        }
        return &v;
    }

    void fail(const std::string& key, const std::string& what) { errors_.push_back(path_ + key + " " + what); }
    void check(bool ok, const std::string& key, const std::string& what) {
        if (!ok) fail(key, what);
    }

    void reject_unknown() {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) errors_.push_back(path_ + it.key() + " is not a known field");
    }

    std::string path(const std::string& key) const { return path_ + key + "."; }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

ScenarioKind scenario_from(const std::string& s, bool& ok) {
    static const std::pair<const char*, ScenarioKind> table[] = {
        {"generic2", ScenarioKind::generic2},   {"generic_n", ScenarioKind::generic_n},
        {"detector", ScenarioKind::detector},   {"selector", ScenarioKind::selector},
        {"intermittency", ScenarioKind::intermittency}, {"spin", ScenarioKind::spin},
        {"position", ScenarioKind::position},   {"statistics", ScenarioKind::statistics}};
    for (const auto& [name, kind] : table)
        if (s == name) {
            ok = true;
            return kind;
        }
    ok = false;
    return ScenarioKind::generic2;
}

void read_model(Reader& r, ModelParams& m) {
    int chaos_keys = 0;
    double v = 0.0;
    if (r.has("k")) {
        r.get("k", v);
        m.k = v;
        ++chaos_keys;
    }
    if (r.has("lambda_c")) {
        r.get("lambda_c", v);
        m.k = v * v;
        ++chaos_keys;
    }
    if (r.has("R2")) {
        r.get("R2", v);
        m.k = v;
        ++chaos_keys;
    }
    r.check(chaos_keys <= 1, "k", "conflicts with lambda_c / R2 (give exactly one)");
    r.get("beta", m.beta);
    r.get("gamma", m.gamma);
    r.get("s", m.s);
    r.get("capture_epsilon", m.capture_epsilon);
    r.get("capture_window", m.capture_window);
    r.get("max_cycles", m.max_cycles);
    r.get("reverse_attraction", m.reverse_attraction);
    std::string env = m.environment == Environment::ideal_dephasing ? "ideal" : "explicit";
    r.get("environment", env);
    if (env == "ideal") m.environment = Environment::ideal_dephasing;
    else if (env == "explicit") m.environment = Environment::explicit_unitary;
    else r.fail("environment", "must be \"ideal\" or \"explicit\"");
    r.get("env_width", m.env_width);
    r.get("warmup", m.warmup);
    r.reject_unknown();

    r.check(m.k > 0.0 && std::isfinite(m.k), "k", "must be positive");
    r.check(std::abs(m.beta) <= 1.0, "beta", "must lie in [-1, 1]");
    r.check(m.gamma >= 0.0 && m.gamma <= 1.0, "gamma", "must lie in [0, 1]");
    r.check(m.s > 0.0, "s", "must be positive");
    r.check(m.capture_epsilon > 0.0 && m.capture_epsilon < 0.1, "capture_epsilon", "must lie in (0, 0.1)");
    r.check(m.capture_window >= 1, "capture_window", "must be >= 1");
    r.check(m.max_cycles >= 1, "max_cycles", "must be >= 1");
    r.check(m.env_width >= 1, "env_width", "must be >= 1");
    r.check(m.warmup >= 0, "warmup", "must be >= 0");
}

void check_probs(Reader& r, const std::string& key, const rvec& p) {
    if (p.size() == 0) return;
    r.check(p.size() >= 2, key, "needs at least two entries");
    r.check((p.array() >= 0.0).all(), key, "entries must be >= 0");
    r.check(std::abs(p.sum() - 1.0) <= 1e-9, key, "must sum to 1");
}

void read_detector(Reader& r, DetectorSpec& d, double& seed_p, bool require) {
    r.get("A", d.A);
    r.get("E_dec", d.E_dec, require);
    r.get("B", d.B, require);
    r.get("hopping", d.hopping);
    r.get("a0", d.a0);
    r.get("a1", d.a1);
    r.get("weight_a0", d.weight_a0);
    r.get("seed_p", seed_p);
    r.check(d.A >= 2 && d.A % 2 == 0, "A", "must be even and >= 2");
    r.check(d.E_dec > 0.0, "E_dec", "must be positive");
    r.check(d.B >= 0.0, "B", "must be >= 0");
    r.check(d.a0 >= 0 && d.a0 < d.A && d.a1 >= 0 && d.a1 < d.A && d.a0 != d.a1, "a0", "and a1 must be distinct indices below A");
    r.check(d.weight_a0 >= 0.0 && d.weight_a0 < 1.0, "weight_a0", "must lie in [0, 1)");
    r.check(seed_p >= 0.0 && seed_p < 0.5, "seed_p", "must lie in [0, 0.5)");
}

void read_params(Reader& r, RunConfig& c) {
    switch (c.scenario) {
        case ScenarioKind::generic2: {
            double q = 0.5;
            r.get("q", q);
            r.check(q >= 0.0 && q <= 1.0, "q", "must lie in [0, 1]");
            c.probs = rvec(2);
            c.probs << q, 1.0 - q;
            break;
        }
        case ScenarioKind::generic_n:
            r.get_vec("probs", c.probs, true);
            check_probs(r, "probs", c.probs);
            break;
        case ScenarioKind::detector:
            read_detector(r, c.detector, c.seed_p, true);
            break;
        case ScenarioKind::selector:
            r.get_vec("weights", c.probs, true);
            check_probs(r, "weights", c.probs);
            break;
        case ScenarioKind::intermittency: {
            auto& in = c.intermittency;
            r.get("omega", in.spec.omega);
            r.get("dec_rate", in.spec.dec_rate);
            r.get("z0", in.z0);
            r.get("steps", in.steps);
            r.get("bins", in.bins);
            r.check(in.spec.omega != 0.0, "omega", "must be nonzero");
            r.check(in.spec.dec_rate > 0.0, "dec_rate", "must be positive");
            r.check(std::abs(in.z0) <= 1.0, "z0", "must lie in [-1, 1]");
            r.check(in.steps >= 1, "steps", "must be >= 1");
            r.check(in.bins >= 1, "bins", "must be >= 1");
            break;
        }
        case ScenarioKind::spin: {
            auto& sp = c.spin;
            r.get("j", sp.spec.j);
            r.get("j_e", sp.spec.j_e);
            r.get("E", sp.spec.E);
            r.get("extended", sp.spec.extended);
            r.get("steps", sp.steps);
            auto half = [](double v) { return v >= 0.0 && std::abs(2 * v - std::round(2 * v)) < 1e-12; };
            r.check(half(sp.spec.j) && sp.spec.j >= 0.5, "j", "must be a positive multiple of 1/2");
            r.check(half(sp.spec.j_e), "j_e", "must be a nonnegative multiple of 1/2");
            r.check(sp.spec.E > 0.0, "E", "must be positive");
            r.check(!sp.spec.extended || std::abs(sp.spec.j - std::round(sp.spec.j)) < 1e-12, "j", "must be an integer in the extended case");
            r.check(sp.steps >= 0, "steps", "must be >= 0");
            break;
        }
        case ScenarioKind::position: {
            auto& p = c.position;
            r.get("n_sites", p.n_sites);
            r.get("site_size", p.site_size);
            r.get("universe_size", p.universe_size);
            r.get("coupling", p.coupling);
            r.get_vec("probs", c.probs);
            r.check(p.n_sites >= 2, "n_sites", "must be >= 2");
            r.check(p.site_size > 0.0, "site_size", "must be positive");
            r.check(p.universe_size > 0.0, "universe_size", "must be positive");
            r.check(p.coupling > 0.0, "coupling", "must be positive");
            if (c.probs.size() == 0 && p.n_sites >= 2) c.probs = rvec::Constant(p.n_sites, 1.0 / p.n_sites);
            check_probs(r, "probs", c.probs);
            r.check(c.probs.size() == p.n_sites, "probs", "must have n_sites entries");
            break;
        }
        case ScenarioKind::statistics: {
            auto& st = c.statistics;
            r.get("n_states", st.n_states);
            r.get("dim", st.dim);
            r.get("beta", st.beta);
            r.get("steps", st.steps);
            r.check(st.n_states >= 2, "n_states", "must be >= 2");
            r.check(st.dim >= 2, "dim", "must be >= 2");
            r.check(std::abs(st.beta) <= 1.0, "beta", "must lie in [-1, 1]");
            r.check(st.steps >= 0, "steps", "must be >= 0");
            break;
        }
    }
    r.reject_unknown();
}

json vec_json(const rvec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json params_json(const RunConfig& c) {
    json p = json::object();
    switch (c.scenario) {
        case ScenarioKind::generic2: p["q"] = c.probs.size() == 2 ? c.probs[0] : 0.5; break;
        case ScenarioKind::generic_n: p["probs"] = vec_json(c.probs); break;
        case ScenarioKind::detector: {
            const auto& d = c.detector;
            p = {{"A", d.A}, {"E_dec", d.E_dec}, {"B", d.B}, {"hopping", d.hopping}, {"a0", d.a0},
                 {"a1", d.a1}, {"weight_a0", d.weight_a0}, {"seed_p", c.seed_p}};
            break;
        }
        case ScenarioKind::selector: p["weights"] = vec_json(c.probs); break;
        case ScenarioKind::intermittency: {
            const auto& in = c.intermittency;
            p = {{"omega", in.spec.omega}, {"dec_rate", in.spec.dec_rate}, {"z0", in.z0},
                 {"steps", in.steps}, {"bins", in.bins}};
            break;
        }
        case ScenarioKind::spin: {
            const auto& sp = c.spin;
            p = {{"j", sp.spec.j}, {"j_e", sp.spec.j_e}, {"E", sp.spec.E}, {"extended", sp.spec.extended},
                 {"steps", sp.steps}};
            break;
        }
        case ScenarioKind::position: {
            const auto& q = c.position;
            p = {{"n_sites", q.n_sites}, {"site_size", q.site_size}, {"universe_size", q.universe_size},
                 {"coupling", q.coupling}, {"probs", vec_json(c.probs)}};
            break;
        }
        case ScenarioKind::statistics: {
            const auto& st = c.statistics;
            p = {{"n_states", st.n_states}, {"dim", st.dim}, {"beta", st.beta}, {"steps", st.steps}};
            break;
        }
    }
    return p;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> errors)
    : std::runtime_error("invalid config: " + join(errors)), errors_(std::move(errors)) {}

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::generic2: return "generic2";
        case ScenarioKind::generic_n: return "generic_n";
        case ScenarioKind::detector: return "detector";
        case ScenarioKind::selector: return "selector";
        case ScenarioKind::intermittency: return "intermittency";
        case ScenarioKind::spin: return "spin";
        case ScenarioKind::position: return "position";
        case ScenarioKind::statistics: return "statistics";
    }
    return "?";
}

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed config: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config must be a JSON object");
    if (!doc.contains("schema") || !doc["schema"].is_string())
        throw SchemaError("config lacks the \"schema\" field (expected \"mom/1\")");
    if (doc["schema"].get<std::string>() != kSchema)
        throw SchemaError("unsupported schema \"" + doc["schema"].get<std::string>() + "\" (expected \"mom/1\")");

    std::vector<std::string> errors;
    RunConfig c;
    Reader top(doc, "", errors);
    top.has("schema");
    std::string scen;
    top.get("scenario", scen, true);
    bool scenario_ok = false;
    if (!scen.empty()) {
        bool& ok = scenario_ok;
        c.scenario = scenario_from(scen, ok);
        if (!ok) top.fail("scenario", "is not one of generic2, generic_n, detector, selector, intermittency, spin, position, statistics");
    }
    top.get("trials", c.trials);
    top.check(c.trials >= 1, "trials", "must be >= 1");
    if (top.has("seed")) {
        const json& s = doc["seed"];
        if (s.is_number_unsigned()) c.seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<long long>() >= 0) c.seed = static_cast<std::uint64_t>(s.get<long long>());
        else top.fail("seed", "must be a nonnegative 64-bit integer");
    }
    top.get("output", c.output);
    top.get("threads", c.threads);
    top.check(c.threads >= 0, "threads", "must be >= 0");
    if (const json* m = top.object("model")) {
        Reader r(*m, "model.", errors);
        read_model(r, c.model);
    }
    const json* p = top.object("params");
    const json empty = json::object();
    Reader pr(p ? *p : empty, "params.", errors);
    if (scenario_ok) read_params(pr, c);
    top.reject_unknown();
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    const ModelParams& m = c.model;
    json doc = {{"schema", kSchema},
                {"scenario", to_string(c.scenario)},
                {"trials", c.trials},
                {"seed", c.seed},
                {"output", c.output},
                {"threads", c.threads},
                {"model",
                 {{"k", m.k},
                  {"beta", m.beta},
                  {"gamma", m.gamma},
                  {"s", m.s},
                  {"capture_epsilon", m.capture_epsilon},
                  {"capture_window", m.capture_window},
                  {"max_cycles", m.max_cycles},
                  {"reverse_attraction", m.reverse_attraction},
                  {"environment", m.environment == Environment::ideal_dephasing ? "ideal" : "explicit"},
                  {"env_width", m.env_width},
                  {"warmup", m.warmup}}},
                {"params", params_json(c)}};
    return doc.dump(2) + "\n";
}

bool engine_driven(ScenarioKind k) {
    return k == ScenarioKind::generic2 || k == ScenarioKind::generic_n || k == ScenarioKind::detector ||
           k == ScenarioKind::selector || k == ScenarioKind::position;
}

Scenario make_scenario(const RunConfig& c) {
    switch (c.scenario) {
        case ScenarioKind::generic2:
        case ScenarioKind::generic_n: return build_generic(c.model, c.probs);
        case ScenarioKind::detector: return detector_scenario(c.model, c.detector, c.seed_p);
        case ScenarioKind::selector: return selector_scenario(c.model, c.probs.cwiseSqrt().cast<cplx>());
        case ScenarioKind::position: return position_scenario(c.model, c.position, c.probs);
        default: break;
    }
    throw std::invalid_argument(std::string("scenario ") + to_string(c.scenario) + " is not engine driven");
}

// ---- output ------------------------------------------------------------------

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << "trial,outcome,cycles,final_z,censored\n";
    for (const auto& r : records)
        os << r.trial << ',' << r.outcome << ',' << r.cycles << ',' << format_double(r.final_z) << ','
           << (r.censored ? 1 : 0) << '\n';
}

std::vector<TrialRecord> read_trials_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty trials file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "trial,outcome,cycles,final_z,censored") throw ParseError("unexpected trials header: " + line);
    std::vector<TrialRecord> out;
    long long lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw ParseError("line " + std::to_string(lineno) + ": expected 5 fields");
        TrialRecord r;
        auto num = [&](const std::string& s, auto& v) {
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw ParseError("line " + std::to_string(lineno) + ": bad number '" + s + "'");
        };
        int cens = 0;
        num(f[0], r.trial);
        num(f[1], r.outcome);
        num(f[2], r.cycles);
        num(f[3], r.final_z);
        num(f[4], cens);
        r.censored = cens != 0;
        out.push_back(r);
    }
    return out;
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
    os << "bin_center,density\n";
    for (std::size_t b = 0; b < h.density.size(); ++b)
        os << format_double(h.center(b)) << ',' << format_double(h.density[b]) << '\n';
}

std::string report_json(const EnsembleReport& rep, const std::string& scenario, std::uint64_t seed,
                        const std::string& extra) {
    json j = {{"scenario", scenario},
              {"seed", seed},
              {"trials", rep.trials},
              {"outcome_counts", rep.outcome_counts},
              {"target_probs", rep.target_probs},
              {"frequencies", rep.frequencies},
              {"corrected_probs", rep.corrected_probs},
              {"chi_square", rep.chi_square},
              {"chi_square_p", rep.chi_square_p},
              {"chi_square_corrected", rep.chi_square_corrected},
              {"binomial_p", rep.binomial_p},
              {"mean_time", rep.mean_time},
              {"mean_time_lower", rep.mean_time_lower},
              {"censored", rep.censored},
              {"errors", rep.errors},
              {"deviation_bound", rep.deviation_bound},
              {"max_deviation", rep.max_deviation}};
    if (!extra.empty()) j["extra"] = json::parse(extra);
    return j.dump(2) + "\n";
}

EnsembleReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed summary: ") + e.what());
    }
    EnsembleReport r;
    r.target_probs = j.value("target_probs", std::vector<double>{});
    r.deviation_bound = j.value("deviation_bound", 0.0);
    r.trials = j.value("trials", 0LL);
    return r;
}

}  // namespace mom
