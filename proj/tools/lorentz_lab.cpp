// lorentz_lab: run one experiment suite and write manifest.json, summary.json
// and the suite's CSV tables into the output directory.
//
// Exit status: 0 all gates pass, 1 some gate fails, 2 bad configuration,
// 3 too many trials dropped by numeric guards (the run is invalid).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lorentz/experiments.hpp"
#include "lorentz/parallel.hpp"

#ifndef LORENTZ_VERSION
#define LORENTZ_VERSION "unknown"
#endif

using nlohmann::json;

namespace {

constexpr int kExitGateFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAborts = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class T>
T get_field(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

/// Fills `cfg` from a JSON document; unknown keys are rejected so that typos
/// in sweep generators do not silently fall back to defaults.
void apply_json(lorentz::RunConfig& cfg, const json& j)
{
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "r") {
            if (value.is_array()) {
                cfg.r_grid = get_field<std::vector<double>>(j, "r");
            } else {
                cfg.r_grid = {get_field<double>(j, "r")};
            }
        } else if (key == "r_grid") {
            cfg.r_grid = get_field<std::vector<double>>(j, "r_grid");
        } else if (key == "T") {
            cfg.T = get_field<double>(j, "T");
        } else if (key == "trials") {
            const auto n = get_field<std::int64_t>(j, "trials");
            if (n < 1) {
                throw ConfigError("config field 'trials' must be at least 1");
            }
            cfg.trials = static_cast<std::uint64_t>(n);
        } else if (key == "seed") {
            cfg.seed = get_field<std::uint64_t>(j, "seed");
        } else if (key == "experiment") {
            cfg.experiment = get_field<std::string>(j, "experiment");
        } else if (key == "out" || key == "output_dir") {
            cfg.out_dir = get_field<std::string>(j, key.c_str());
        } else if (key == "workers") {
            cfg.workers = get_field<int>(j, "workers");
        } else if (key == "version" || key == "seeds") {
            // written by this tool into manifests; ignored on re-run
        } else {
            throw ConfigError("unknown config field '" + key + "'");
        }
    }
}

json config_json(const lorentz::RunConfig& cfg)
{
    return {{"experiment", cfg.experiment}, {"r_grid", cfg.r_grid}, {"T", cfg.T},
            {"trials", cfg.trials},         {"seed", cfg.seed},     {"workers", cfg.workers},
            {"out", cfg.out_dir}};
}

std::string all_suites_help()
{
    std::string s = "\nExperiments:\n";
    for (const auto& name : lorentz::suite_names()) {
        s += "  " + name + "\n      " + lorentz::suite_help(name) + "\n";
    }
    s += "\nEnvironment: LORENTZ_LAB_THREADS sets the default worker count.\n"
         "Results do not depend on the worker count.\n";
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo lab for the Boltzmann-Grad limit of the Lorentz gas"};
    app.footer(all_suites_help());

    std::string config_path;
    double r = 0.0;
    std::vector<double> r_grid;
    double T = 0.0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::string experiment;
    int workers = 0;
    std::string out;

    app.add_option("--config", config_path, "JSON config file (a manifest.json from a previous run also works)");
    auto* opt_r = app.add_option("--r", r, "scatterer radius in (0, 0.5)");
    auto* opt_grid = app.add_option("--r-grid", r_grid, "list of radii for the scaling suites")->delimiter(',');
    auto* opt_T = app.add_option("--T", T, "time horizon (suites that use one)");
    auto* opt_trials = app.add_option("--trials", trials, "main trial count (0 or absent: suite default)");
    auto* opt_seed = app.add_option("--seed", seed, "64-bit base seed");
    auto* opt_exp = app.add_option("--experiment", experiment, "suite name, see below");
    auto* opt_workers = app.add_option("--workers", workers, "worker threads");
    auto* opt_out = app.add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    lorentz::RunConfig cfg;
    cfg.workers = lorentz::default_workers();
    try {
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) {
                throw ConfigError("cannot open config file " + config_path);
            }
            json j;
            try {
                j = json::parse(is);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            apply_json(cfg, j.contains("config") ? j.at("config") : j);
        }
        if (*opt_r) {
            cfg.r_grid = {r};
        }
        if (*opt_grid) {
            cfg.r_grid = r_grid;
        }
        if (*opt_T) {
            cfg.T = T;
        }
        if (*opt_trials) {
            if (trials < 1) {
                throw ConfigError("--trials must be at least 1");
            }
            cfg.trials = static_cast<std::uint64_t>(trials);
        }
        if (*opt_seed) {
            cfg.seed = seed;
        }
        if (*opt_exp) {
            cfg.experiment = experiment;
        }
        if (*opt_workers) {
            cfg.workers = workers;
        }
        if (*opt_out) {
            cfg.out_dir = out;
        }
        lorentz::validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "lorentz_lab: " << e.what() << '\n';
        return kExitConfig;
    }

    const auto start = std::chrono::steady_clock::now();
    lorentz::SuiteResult res;
    try {
        res = lorentz::run_suite(cfg);
        std::filesystem::create_directories(cfg.out_dir);
        for (const auto& t : res.tables) {
            lorentz::write_csv(t, cfg.out_dir);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "lorentz_lab: " << e.what() << '\n';
        return kExitConfig;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    // The manifest holds only what determines the outputs, so a re-run from it
    // reproduces every CSV bitwise.
    json manifest = config_json(cfg);
    manifest["version"] = LORENTZ_VERSION;
    manifest["seeds"] = res.seeds;
    std::ofstream(std::filesystem::path(cfg.out_dir) / "manifest.json") << manifest.dump(2) << '\n';

    const bool invalid = res.abort_rate() > lorentz::kMaxAbortRate;
    json gates = json::array();
    for (const auto& g : res.gates) {
        gates.push_back({{"name", g.name},
                         {"pass", g.pass},
                         {"measured", g.measured},
                         {"target", g.target},
                         {"informational", g.informational}});
    }
    json summary{{"experiment", res.suite},
                 {"pass", res.pass() && !invalid},
                 {"gates", gates},
                 {"notes", res.notes},
                 {"units", res.units},
                 {"aborted", res.aborted},
                 {"abort_rate", res.abort_rate()},
                 {"invalid", invalid},
                 {"seconds", seconds}};
    std::ofstream(std::filesystem::path(cfg.out_dir) / "summary.json") << summary.dump(2) << '\n';

    for (const auto& g : res.gates) {
        std::cout << (g.informational ? "[info] " : (g.pass ? "[pass] " : "[FAIL] ")) << g.name << ": " << g.measured
                  << " (target " << g.target << ")\n";
    }
    for (const auto& n : res.notes) {
        std::cout << "  note: " << n << '\n';
    }
    std::cout << "aborted " << res.aborted << " of " << res.units << " units; " << seconds << " s\n";

    if (invalid) {
        std::cerr << "lorentz_lab: abort rate " << res.abort_rate() << " exceeds " << lorentz::kMaxAbortRate << '\n';
        return kExitAborts;
    }
    return res.pass() ? 0 : kExitGateFailed;
}
