#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorentz/exploration.hpp"

namespace lorentz {

/// Parameters of one run of the lab. Zero or empty fields mean "use the
/// suite default".
struct RunConfig {
    std::vector<double> r_grid;  ///< one value or a grid, each in (0, 0.5)
    double T = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 20240611;
    std::string experiment = "smoke";
    std::string out_dir = "lab_out";
    int workers = 1;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const RunConfig& cfg);

struct Gate {
    std::string name;
    bool pass = false;
    std::string measured;
    std::string target;
    bool informational = false;  ///< reported, not part of the verdict
};

struct CsvTable {
    std::string name;  ///< file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct SuiteResult {
    std::string suite;
    std::vector<Gate> gates;
    std::vector<CsvTable> tables;
    std::vector<std::string> notes;
    std::uint64_t units = 0;    ///< trial units attempted by guarded estimators
    std::uint64_t aborted = 0;  ///< units dropped by numeric guards
    std::vector<std::uint64_t> seeds;  ///< sub-experiment seeds, in order of use

    bool pass() const;  ///< all non-informational gates pass
    double abort_rate() const;
    void absorb(SuiteResult other);
};

/// Guard-abort rate above which a run is declared invalid.
inline constexpr double kMaxAbortRate = 1e-3;

const std::vector<std::string>& suite_names();
/// One paragraph per suite for --help.
std::string suite_help(const std::string& name);

SuiteResult run_suite(const RunConfig& cfg);

/// CSV with a `# schema=1` header line and %.17g numbers.
void write_csv(const CsvTable& table, const std::string& dir);

/// Positions of an exploration at its start, at every event and at its end.
/// Column `event`: 0 none, 1 recollision, 2 shadowed scattering, 3 fresh scattering.
CsvTable exploration_trace_table(const ExplorationResult& x);
/// Per-leg counts over `legs` consecutive packs of one stream.
CsvTable leg_events_table(double r, std::uint64_t legs, std::uint64_t seed);

// Individual checks; each suite is a combination of these.
SuiteResult check_coupling_identity(double r, double T, std::uint64_t trials, std::uint64_t seed, int workers);
SuiteResult check_oracle_equivalence(double r, std::uint64_t trials, std::uint64_t seed, int workers);
SuiteResult check_uniform_scattering(double r, std::uint64_t trials, std::uint64_t seed, int workers);
SuiteResult check_eta_scaling(const std::vector<double>& r_grid, std::uint64_t flights, std::uint64_t seed,
                              int workers);
SuiteResult check_interleg_scaling(const std::vector<double>& r_grid, std::uint64_t legs, std::uint64_t seed,
                                   int workers);
SuiteResult check_leg_mismatch_scaling(const std::vector<double>& r_grid, std::uint64_t legs, std::uint64_t seed,
                                       int workers);
SuiteResult check_pack_structure(std::uint64_t packs, std::uint64_t seed, int workers);
SuiteResult check_green_envelopes(double r, std::uint64_t trials, std::uint64_t seed, int workers);
/// With `tail_check_small_r`, also reports the escape-angle stability at r/10
/// (20x the samples) as an informational gate.
SuiteResult check_middle_lab(double r, std::uint64_t samples, std::uint64_t seed, int workers,
                             bool tail_check_small_r = true);
SuiteResult check_lambda_measures(std::uint64_t samples, std::uint64_t seed, int workers);
SuiteResult check_sojourn_audit(std::uint64_t instances, std::uint64_t seed);
SuiteResult check_diffusive(double r, double T, std::uint64_t trials, std::uint64_t seed, int workers);

}  // namespace lorentz
