#include "mom/analysis.hpp"
#include "mom/config.hpp"
#include "mom/runs.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitTrial = 2;
constexpr int kExitConfig = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mom::ParseError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

std::optional<int> env_threads() {
    const char* v = std::getenv("MOM_THREADS");
    if (!v || !*v) return std::nullopt;
    try {
        return std::stoi(v);
    } catch (const std::exception&) {
        std::cerr << "mom: ignoring MOM_THREADS=" << v << "\n";
        return std::nullopt;
    }
}

int cmd_run(const std::string& path, std::optional<long long> trials, std::optional<std::uint64_t> seed,
            std::optional<std::string> out, std::optional<int> threads) {
    mom::RunConfig cfg;
    try {
        cfg = mom::load_config(path);
    } catch (const mom::ValidationError& e) {
        std::cerr << "mom: invalid config " << path << "\n";
        for (const auto& msg : e.errors()) std::cerr << "  " << msg << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "mom: " << e.what() << "\n";
        return kExitConfig;
    }
    if (trials) cfg.trials = *trials;
    if (seed) cfg.seed = *seed;
    if (out) cfg.output = *out;
    if (threads) cfg.threads = *threads;
    if (auto t = env_threads()) cfg.threads = *t;
    if (cfg.trials < 1) {
        std::cerr << "mom: trials must be positive\n";
        return kExitConfig;
    }

    mom::RunOutput res;
    try {
        res = mom::run_config(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "mom: " << e.what() << "\n";
        return kExitConfig;
    }

    std::ostringstream csv;
    mom::write_trials_csv(csv, res.records);
    write_file(cfg.output + ".trials.csv", csv.str());
    write_file(cfg.output + ".summary.json",
               mom::report_json(res.report, mom::to_string(cfg.scenario), cfg.seed, res.extra));
    if (res.histogram) {
        std::ostringstream h;
        mom::write_histogram_csv(h, *res.histogram);
        write_file(cfg.output + ".histogram.csv", h.str());
    }

    long long failed = 0;
    for (const auto& r : res.records)
        if (r.error) {
            if (failed++ < 5) std::cerr << "mom: trial " << r.trial << ": " << r.message << "\n";
        }
    std::cout << "wrote " << cfg.output << ".trials.csv (" << res.records.size() << " trials)\n";
    if (failed) {
        std::cerr << "mom: " << failed << " trial(s) failed\n";
        return kExitTrial;
    }
    return 0;
}

int cmd_analyze(const std::string& path, std::optional<std::string> target_arg, std::optional<double> delta_arg) {
    std::vector<mom::TrialRecord> recs;
    try {
        std::ifstream in(path);
        if (!in) throw mom::ParseError("cannot read " + path);
        recs = mom::read_trials_csv(in);
    } catch (const std::exception& e) {
        std::cerr << "mom: " << e.what() << "\n";
        return kExitConfig;
    }

    std::vector<double> target;
    double delta = 0.0;
    const std::string suffix = ".trials.csv";
    if (path.size() > suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        const std::string summary = path.substr(0, path.size() - suffix.size()) + ".summary.json";
        std::ifstream probe(summary);
        if (probe) {
            try {
                const mom::EnsembleReport rep = mom::report_from_json(slurp(summary));
                target = rep.target_probs;
                delta = rep.deviation_bound;
            } catch (const std::exception& e) {
                std::cerr << "mom: ignoring " << summary << ": " << e.what() << "\n";
            }
        }
    }
    if (target_arg) {
        target.clear();
        std::stringstream ss(*target_arg);
        std::string cell;
        while (std::getline(ss, cell, ',')) target.push_back(std::stod(cell));
    }
    if (delta_arg) delta = *delta_arg;
    if (target.empty()) {
        int top = -1;
        for (const auto& r : recs) top = std::max(top, r.outcome);
        if (top < 0) {
            std::cerr << "mom: no outcomes in " << path << " and no --target\n";
            return kExitConfig;
        }
        target.assign(static_cast<std::size_t>(top + 1), 1.0 / (top + 1));
        std::cerr << "mom: no target given, testing against uniform\n";
    }
    const mom::EnsembleReport rep = mom::born_report(recs, target, delta);
    std::cout << mom::report_json(rep, "analyze", 0);
    return 0;
}

int cmd_orbit(const std::string& which, double k, long long length, long long transient, int bins, double s,
              double x0, std::optional<std::string> out) {
    mom::OrbitMap map;
    if (which == "phi")
        map = mom::phi_map(k, x0);
    else if (which == "effective")
        map = mom::effective_phi_map(k, s, x0);
    else {
        std::cerr << "mom: unknown map '" << which << "' (phi, effective)\n";
        return kExitConfig;
    }
    try {
        const mom::OrbitStats st = mom::orbit_stats(map, bins, transient, length);
        nlohmann::json j = {{"map", which},        {"k", k},
                            {"length", length},    {"transient", transient},
                            {"liapunov", st.liapunov}, {"tv_from_uniform", mom::tv_from_uniform(st.histogram)}};
        if (which == "effective") j["s"] = s;
        std::cout << j.dump(2) << "\n";
        if (out) {
            std::ostringstream h;
            mom::write_histogram_csv(h, st.histogram);
            write_file(*out, h.str());
        }
    } catch (const mom::OrbitDiverged& e) {
        std::cerr << "mom: " << e.what() << "\n";
        return kExitTrial;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-observer measurement simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an ensemble from a JSON config");
    std::string cfg_path;
    std::optional<long long> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    run->add_option("config", cfg_path, "config file")->required();
    run->add_option("--trials", trials, "override trial count");
    run->add_option("--seed", seed, "override seed");
    run->add_option("--out", out, "output prefix");
    run->add_option("--threads", threads, "worker threads (MOM_THREADS wins)");

    auto* analyze = app.add_subcommand("analyze", "Born-rule statistics of a trials CSV");
    std::string csv_path;
    std::optional<std::string> target;
    std::optional<double> delta;
    analyze->add_option("trials", csv_path, "trials CSV")->required();
    analyze->add_option("--target", target, "comma separated target probabilities");
    analyze->add_option("--delta", delta, "capture threshold for the corrected probabilities");

    auto* orbit = app.add_subcommand("orbit", "Liapunov exponent and invariant density of a 1D map");
    std::string which;
    double k = 0.0, s = 1.0, x0 = 0.3;
    long long length = 100000, transient = mom::kDefaultTransient;
    int bins = 50;
    std::optional<std::string> orbit_out;
    orbit->add_option("map", which, "phi or effective")->required();
    orbit->add_option("--k", k, "map strength")->required();
    orbit->add_option("--length", length, "iterations after the transient")->check(CLI::PositiveNumber);
    orbit->add_option("--transient", transient, "discarded iterations")->check(CLI::NonNegativeNumber);
    orbit->add_option("--bins", bins, "histogram bins")->check(CLI::PositiveNumber);
    orbit->add_option("--s", s, "extent of the correcting flow");
    orbit->add_option("--x0", x0, "initial angle");
    orbit->add_option("--out", orbit_out, "histogram CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return cmd_run(cfg_path, trials, seed, out, threads);
        if (*analyze) return cmd_analyze(csv_path, target, delta);
        if (*orbit) return cmd_orbit(which, k, length, transient, bins, s, x0, orbit_out);
    } catch (const std::exception& e) {
        std::cerr << "mom: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
