// Runs every acceptance criterion at its full size and prints one verdict line
// per criterion, followed by the measured gates. Exits 1 if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lorentz/experiments.hpp"
#include "lorentz/parallel.hpp"

using namespace lorentz;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Criterion {
    int id;
    std::string title;
    std::function<SuiteResult(int)> run;
};

}  // namespace

int main()
{
    const int w = default_workers();
    const std::vector<double> grid{0.04, 0.02, 0.01, 0.005};

    const std::vector<Criterion> criteria{
        {1, "coupling identity", [](int w) { return check_coupling_identity(0.01, 20.0, 10'000, kSeed, w); }},
        {2, "oracle equivalence", [](int w) { return check_oracle_equivalence(0.05, 10'000, kSeed, w); }},
        {3, "uniform scattering", [](int w) { return check_uniform_scattering(0.05, 100'000, kSeed, w); }},
        {4, "eta scaling", [&](int w) { return check_eta_scaling(grid, 10'000'000, kSeed, w); }},
        {5, "inter-leg events", [&](int w) { return check_interleg_scaling(grid, 1'000'000, kSeed, w); }},
        {6, "one-leg mismatch", [&](int w) { return check_leg_mismatch_scaling(grid, 1'000'000, kSeed, w); }},
        {7, "pack structure", [](int w) { return check_pack_structure(1'000'000, kSeed, w); }},
        {8, "Green's function envelopes", [](int w) { return check_green_envelopes(0.01, 200'000, kSeed, w); }},
        {9, "middle-segment lab", [](int w) { return check_middle_lab(0.01, 1'000'000, kSeed, w, true); }},
        {10, "lambda measures", [](int w) { return check_lambda_measures(10'000'000, kSeed, w); }},
        {11, "sojourn audit", [](int) { return check_sojourn_audit(100'000, kSeed); }},
        {12, "diffusive diagnostics", [](int w) { return check_diffusive(0.01, 100.0, 2000, kSeed, w); }},
    };

    std::vector<std::string> verdicts;
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        const SuiteResult res = c.run(w);
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = res.pass() && res.abort_rate() <= kMaxAbortRate;
        failed += ok ? 0 : 1;

        char head[160];
        std::snprintf(head, sizeof head, "criterion %2d %-28s %s", c.id, c.title.c_str(), ok ? "PASS" : "FAIL");
        verdicts.emplace_back(head);
        std::printf("%s  (%.1f s, aborted %llu of %llu units)\n", head, sec,
                    static_cast<unsigned long long>(res.aborted), static_cast<unsigned long long>(res.units));
        for (const auto& g : res.gates) {
            std::printf("    %s %s: %s (target %s)\n", g.informational ? "info" : (g.pass ? "pass" : "FAIL"),
                        g.name.c_str(), g.measured.c_str(), g.target.c_str());
        }
        for (const auto& n : res.notes) {
            std::printf("    note: %s\n", n.c_str());
        }
        std::fflush(stdout);
    }

    std::printf("\nsummary\n");
    for (const auto& v : verdicts) {
        std::printf("%s\n", v.c_str());
    }
    std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
