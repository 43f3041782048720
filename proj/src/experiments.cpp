#include "lorentz/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lorentz/exploration.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/histogram.hpp"
#include "lorentz/lab.hpp"
#include "lorentz/middle.hpp"
#include "lorentz/parallel.hpp"
#include "lorentz/stats.hpp"
#include "lorentz/zprocess.hpp"

namespace lorentz {

namespace {

// Tolerances of the individual gates.
constexpr double kCouplingTol = 1e-9;
constexpr double kPValueFloor = 0.01;
constexpr double kEtaSlopeLo = 0.85;
constexpr double kEtaSlopeHi = 1.15;
constexpr double kPairSlopeLo = 1.6;
constexpr double kPairSlopeHi = 2.4;
constexpr double kInterlegSlopeLo = 1.6;
constexpr double kInterlegSlopeHi = 2.4;
constexpr double kLegSlopeLo = 1.7;
constexpr double kLegSlopeHi = 2.5;
constexpr double kGamma2Tol = 0.002;
constexpr double kGreenSlopeLo = -1.25;
constexpr double kGreenSlopeHi = -0.75;
constexpr double kGreenRatioMax = 10.0;
constexpr std::uint64_t kShellMinHits = 20;
constexpr double kBetaSlopeLo = -1.3;
constexpr double kBetaSlopeHi = -0.75;
constexpr double kEscapeCStability = 0.25;
constexpr double kLambdaZ = 1.959963984540054;
constexpr double kSojournSlack = 1e-9;
constexpr double kSojournMinAngle = 0.01;
constexpr double kVarianceRatioTol = 0.05;
constexpr double kSupQuantileMax = 0.1;
constexpr double kDiffusivityTol = 0.03;
constexpr double kDiffusivity = 2.0 / 3.0;

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string fmt_range(double lo, double hi)
{
    return "[" + fmt(lo) + ", " + fmt(hi) + "]";
}

Gate make_gate(std::string name, bool pass, std::string measured, std::string target, bool info = false)
{
    return {std::move(name), pass, std::move(measured), std::move(target), info};
}

bool in_band(double x, double lo, double hi)
{
    return std::isfinite(x) && x >= lo && x <= hi;
}

/// Trial count at r for an event of probability ~ r^2, so that the expected
/// number of successes is roughly the same across the grid.
std::uint64_t scaled_trials(std::uint64_t at_min, double r_min, double r, std::uint64_t floor)
{
    const double n = static_cast<double>(at_min) * (r_min / r) * (r_min / r);
    return std::max<std::uint64_t>(floor, static_cast<std::uint64_t>(std::ceil(n)));
}

struct VecTally {
    std::vector<double> a;
    std::vector<double> b;
    std::uint64_t bad = 0;
    std::uint64_t aborted = 0;
    void merge(const VecTally& o)
    {
        a.insert(a.end(), o.a.begin(), o.a.end());
        b.insert(b.end(), o.b.begin(), o.b.end());
        bad += o.bad;
        aborted += o.aborted;
    }
};

struct CountHist {
    std::vector<std::uint64_t> bins;
    std::vector<double> first;
    std::uint64_t aborted = 0;
    void add(std::size_t k)
    {
        if (bins.size() <= k) {
            bins.resize(k + 1, 0);
        }
        ++bins[k];
    }
    void merge(const CountHist& o)
    {
        for (std::size_t k = 0; k < o.bins.size(); ++k) {
            if (o.bins[k] > 0) {
                if (bins.size() <= k) {
                    bins.resize(k + 1, 0);
                }
                bins[k] += o.bins[k];
            }
        }
        first.insert(first.end(), o.first.begin(), o.first.end());
        aborted += o.aborted;
    }
};

double exp1_cdf(double x)
{
    return x <= 0.0 ? 0.0 : -std::expm1(-x);
}

CsvTable slope_table(const std::string& name, const std::vector<double>& r, const std::vector<EstimateCI>& est)
{
    CsvTable t{name, {"r", "trials", "successes", "p", "lo", "hi"}, {}};
    for (std::size_t i = 0; i < r.size(); ++i) {
        t.rows.push_back({r[i], static_cast<double>(est[i].trials), static_cast<double>(est[i].successes),
                          est[i].estimate, est[i].lo, est[i].hi});
    }
    return t;
}

CsvTable histogram_table(const std::string& name, const RadialHistogram& h, const EnvelopeFit* fit = nullptr)
{
    CsvTable t{name, {"shell", "rho_lo", "rho_hi", "rho_mid", "mass", "hits", "density", "envelope"}, {}};
    for (int i = 0; i < RadialHistogram::kShells; ++i) {
        const double env = fit ? fit->envelope(h.shell_center(i)) : std::numeric_limits<double>::quiet_NaN();
        t.rows.push_back({static_cast<double>(i), h.edge(i), h.edge(i + 1), h.shell_center(i), h.mass(i),
                          static_cast<double>(h.hits(i)), h.density(i), env});
    }
    return t;
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    }
    return out;
}

}  // namespace

bool SuiteResult::pass() const
{
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.informational || g.pass; });
}

double SuiteResult::abort_rate() const
{
    return units == 0 ? 0.0 : static_cast<double>(aborted) / static_cast<double>(units);
}

void SuiteResult::absorb(SuiteResult other)
{
    for (auto& g : other.gates) {
        gates.push_back(std::move(g));
    }
    for (auto& t : other.tables) {
        tables.push_back(std::move(t));
    }
    for (auto& n : other.notes) {
        notes.push_back(std::move(n));
    }
    seeds.insert(seeds.end(), other.seeds.begin(), other.seeds.end());
    units += other.units;
    aborted += other.aborted;
}

SuiteResult check_coupling_identity(double r, double T, std::uint64_t trials, std::uint64_t seed, int workers)
{
    SuiteResult res;
    res.suite = "coupling-identity";
    const std::uint64_t s = derive_seed(seed, 1);
    res.seeds.push_back(s);
    auto tally = run_trials<VecTally>(trials, workers, [&](std::uint64_t k, VecTally& t) {
        RngStream rng(s, k);
        const FlightStream fs = generate_flight_stream(rng, T);
        try {
            const ExplorationResult ex = explore(fs, r, T);
            const PiecewisePath y = build_Y(fs);
            const auto div = first_divergence(ex.path, y, kCouplingTol);
            const double mismatch = ex.first_mismatch.value_or(std::numeric_limits<double>::infinity());
            if (div && *div < mismatch) {
                ++t.bad;
            }
            t.a.push_back(ex.first_mismatch ? *ex.first_mismatch : -1.0);
            t.b.push_back(div ? *div : -1.0);
        } catch (const DegenerateGeometry&) {
            ++t.aborted;
        } catch (const BudgetExhausted&) {
            ++t.aborted;
        }
    });
    res.units = trials;
    res.aborted = tally.aborted;
    const std::uint64_t checked = trials - tally.aborted;
    res.gates.push_back(make_gate("coupling identity: X = Y before the first mismatch", tally.bad == 0 && checked > 0,
                                  std::to_string(checked - tally.bad) + "/" + std::to_string(checked) + " trials",
                                  "100% of trials"));
    std::uint64_t with_mismatch = 0;
    for (double m : tally.a) {
        with_mismatch += m >= 0.0 ? 1 : 0;
    }
    res.notes.push_back("trials with a mismatch before T: " + std::to_string(with_mismatch));
    CsvTable tab{"coupling_identity", {"trial", "first_mismatch", "first_divergence"}, {}};
    for (std::size_t i = 0; i < tally.a.size(); ++i) {
        tab.rows.push_back({static_cast<double>(i), tally.a[i], tally.b[i]});
    }
    res.tables.push_back(std::move(tab));
    return res;
}

SuiteResult check_oracle_equivalence(double r, std::uint64_t trials, std::uint64_t seed, int workers)
{
    SuiteResult res;
    res.suite = "oracle-equivalence";
    constexpr double kWindow = 5.0;
    constexpr double kLongRun = 60.0;
    const std::uint64_t s_explore = derive_seed(seed, 2);
    const std::uint64_t s_field = derive_seed(seed, 3);
    const std::uint64_t s_dir = derive_seed(seed, 4);
    res.seeds = {s_explore, s_field, s_dir};

    auto explored = run_trials<CountHist>(trials, workers, [&](std::uint64_t k, CountHist& t) {
        RngStream rng(s_explore, k);
        FlightStream fs = generate_flight_stream(rng, kWindow);
        extend_flight_stream(fs, rng, 2);
        try {
            // the particle leaves the origin along u_1: no scattering at time 0
            const double t_max = std::max(kWindow, fs.tau(1));
            const ExplorationResult ex = explore_flights(fs.u(1), fs.flights, r, t_max);
            std::size_t count = 0;
            double first = std::numeric_limits<double>::infinity();
            for (const Event& e : ex.events.records) {
                if (e.kind == EventKind::shadowed_scattering || !(e.t > 0.0)) {
                    continue;
                }
                first = std::min(first, e.t);
                count += e.t <= kWindow ? 1 : 0;
            }
            t.add(count);
            t.first.push_back(first);
        } catch (const DegenerateGeometry&) {
            ++t.aborted;
        } catch (const BudgetExhausted&) {
            ++t.aborted;
        }
    });

    const double rho = PoissonField::unit_mean_free_path_density(r);
    auto direct = run_trials<CountHist>(trials, workers, [&](std::uint64_t k, CountHist& t) {
        RngStream dir(s_dir, k);
        const UnitVec3 u0 = sample_direction(dir);
        try {
            PoissonField field(r, rho, derive_seed(s_field, k));
            DirectRun run = direct_field_simulate(field, u0, kWindow);
            if (run.collision_times.empty()) {
                run = direct_field_simulate(field, u0, kLongRun);
            }
            std::size_t count = 0;
            for (double c : run.collision_times) {
                count += c <= kWindow ? 1 : 0;
            }
            t.add(count);
            t.first.push_back(run.collision_times.empty() ? kLongRun : run.collision_times.front());
        } catch (const DegenerateGeometry&) {
            ++t.aborted;
        }
    });

    res.units = 2 * trials;
    res.aborted = explored.aborted + direct.aborted;
    const TestResult ks_dir = ks_one_sample(direct.first, exp1_cdf);
    const TestResult ks_exp = ks_one_sample(explored.first, exp1_cdf);
    const std::size_t nb = std::max(explored.bins.size(), direct.bins.size());
    explored.bins.resize(nb, 0);
    direct.bins.resize(nb, 0);
    const TestResult chi = chi_square_two_sample(explored.bins, direct.bins);

    res.gates.push_back(make_gate("direct simulation first-collision time ~ Exp(1), KS p", ks_dir.p_value > kPValueFloor,
                                  fmt(ks_dir.p_value), "> " + fmt(kPValueFloor)));
    res.gates.push_back(make_gate("exploration first-collision time ~ Exp(1), KS p", ks_exp.p_value > kPValueFloor,
                                  fmt(ks_exp.p_value), "> " + fmt(kPValueFloor)));
    res.gates.push_back(make_gate("collision counts in [0,5], exploration vs direct, chi-square p",
                                  chi.p_value > kPValueFloor, fmt(chi.p_value) + " (dof " + std::to_string(chi.dof) + ")",
                                  "> " + fmt(kPValueFloor)));
    CsvTable tab{"collision_counts", {"count", "explore", "direct"}, {}};
    for (std::size_t k = 0; k < nb; ++k) {
        tab.rows.push_back({static_cast<double>(k), static_cast<double>(explored.bins[k]),
                            static_cast<double>(direct.bins[k])});
    }
    res.tables.push_back(std::move(tab));
    return res;
}

SuiteResult check_uniform_scattering(double r, std::uint64_t trials, std::uint64_t seed, int workers)
{
    SuiteResult res;
    res.suite = "uniform-scattering";
    constexpr double kLongRun = 60.0;
    const std::uint64_t s_field = derive_seed(seed, 5);
    const std::uint64_t s_dir = derive_seed(seed, 6);
    res.seeds = {s_field, s_dir};
    const double rho = PoissonField::unit_mean_free_path_density(r);
    auto tally = run_trials<VecTally>(trials, workers, [&](std::uint64_t k, VecTally& t) {
        RngStream dir(s_dir, k);
        const UnitVec3 u0 = sample_direction(dir);
        try {
            PoissonField field(r, rho, derive_seed(s_field, k));
            const DirectRun run = direct_field_simulate(field, u0, 2.0);
            const DirectRun& use = run.collision_times.empty() ? direct_field_simulate(field, u0, kLongRun) : run;
            const auto& vel = use.path.velocities();
            if (use.collision_times.empty() || vel.size() < 2) {
                ++t.aborted;
                return;
            }
            t.a.push_back(dot(vel[0].vec(), vel[1].vec()));
        } catch (const DegenerateGeometry&) {
            ++t.aborted;
        }
    });
    res.units = trials;
    res.aborted = tally.aborted;
    const TestResult ks = ks_one_sample(tally.a, [](double c) { return std::clamp((c + 1.0) / 2.0, 0.0, 1.0); });
    res.gates.push_back(make_gate("cosine of the scattering angle ~ U(-1,1), KS p", ks.p_value > kPValueFloor,
                                  fmt(ks.p_value) + " on " + std::to_string(tally.a.size()) + " scatterings",
                                  "> " + fmt(kPValueFloor)));
    CsvTable tab{"scattering_cosine", {"bin_lo", "bin_hi", "count"}, {}};
    std::vector<double> bins(20, 0.0);
    for (double c : tally.a) {
        bins[static_cast<std::size_t>(std::clamp(static_cast<int>((c + 1.0) * 10.0), 0, 19))] += 1.0;
    }
    for (int i = 0; i < 20; ++i) {
        tab.rows.push_back({-1.0 + 0.1 * i, -0.9 + 0.1 * i, bins[static_cast<std::size_t>(i)]});
    }
    res.tables.push_back(std::move(tab));
    return res;
}

SuiteResult check_eta_scaling(const std::vector<double>& r_grid, std::uint64_t flights, std::uint64_t seed,
                              int workers)
{
    SuiteResult res;
    res.suite = "slope-eta";
    std::vector<EstimateCI> eta;
    std::vector<EstimateCI> pair;
    std::uint64_t prime_hat = 0;
    std::uint64_t prime_tilde = 0;
    EventParams params;
    params.workers = workers;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const std::uint64_t s1 = derive_seed(seed, 100 + i);
        const std::uint64_t s2 = derive_seed(seed, 200 + i);
        res.seeds.push_back(s1);
        res.seeds.push_back(s2);
        const EventEstimate e1 = estimate_event_probability(EstimatorKind::eta, r_grid[i], flights, s1, params);
        const EventEstimate e2 = estimate_event_probability(EstimatorKind::eta_pair, r_grid[i], flights, s2, params);
        eta.push_back(e1.ci);
        pair.push_back(e2.ci);
        prime_hat += e1.prime_violations_hat;
        prime_tilde += e1.prime_violations_tilde;
        res.units += e1.ci.trials + e2.ci.trials + e1.aborted + e2.aborted;
        res.aborted += e1.aborted + e2.aborted;
    }
    const LineFit f1 = loglog_probability_slope(r_grid, eta);
    const LineFit f2 = loglog_probability_slope(r_grid, pair);
    res.gates.push_back(make_gate("slope of E[eta_j] against r", in_band(f1.slope, kEtaSlopeLo, kEtaSlopeHi),
                                  fmt(f1.slope) + " +- " + fmt(f1.slope_se), fmt_range(kEtaSlopeLo, kEtaSlopeHi)));
    res.gates.push_back(make_gate("slope of E[eta_j eta_j+1] against r", in_band(f2.slope, kPairSlopeLo, kPairSlopeHi),
                                  fmt(f2.slope) + " +- " + fmt(f2.slope_se), fmt_range(kPairSlopeLo, kPairSlopeHi)));
    res.gates.push_back(make_gate("exact eta without its angle-only companion", prime_hat + prime_tilde == 0,
                                  std::to_string(prime_hat) + " hat, " + std::to_string(prime_tilde) + " tilde", "0",
                                  true));
    res.tables.push_back(slope_table("eta", r_grid, eta));
    res.tables.push_back(slope_table("eta_pair", r_grid, pair));
    return res;
}

SuiteResult check_interleg_scaling(const std::vector<double>& r_grid, std::uint64_t legs, std::uint64_t seed,
                                   int workers)
{
    SuiteResult res;
    res.suite = "slope-interleg";
    const double r_min = *std::min_element(r_grid.begin(), r_grid.end());
    EventParams params;
    params.workers = workers;
    std::vector<EstimateCI> est;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const std::uint64_t s = derive_seed(seed, 300 + i);
        res.seeds.push_back(s);
        const std::uint64_t n = scaled_trials(legs, r_min, r_grid[i], std::min<std::uint64_t>(legs, 50'000));
        const EventEstimate e = estimate_event_probability(EstimatorKind::interleg, r_grid[i], n, s, params);
        est.push_back(e.ci);
        res.units += e.ci.trials + e.aborted;
        res.aborted += e.aborted;
    }
    const LineFit f = loglog_probability_slope(r_grid, est);
    res.gates.push_back(make_gate("slope of P(W_hat or W_tilde) per leg against r",
                                  in_band(f.slope, kInterlegSlopeLo, kInterlegSlopeHi),
                                  fmt(f.slope) + " +- " + fmt(f.slope_se),
                                  fmt_range(kInterlegSlopeLo, kInterlegSlopeHi)));
    res.tables.push_back(slope_table("interleg", r_grid, est));

    // forward shadowing of a leg by its own past against the time-reversed
    // construction, at the largest r where both are frequent
    const double r_dual = *std::max_element(r_grid.begin(), r_grid.end());
    const std::uint64_t n_dual = std::max<std::uint64_t>(2000, legs / 20);
    EventParams dual = params;
    dual.j = 3;
    const std::uint64_t sa = derive_seed(seed, 310);
    const std::uint64_t sb = derive_seed(seed, 311);
    res.seeds.push_back(sa);
    res.seeds.push_back(sb);
    const EventEstimate fwd = estimate_event_probability(EstimatorKind::interleg_hat, r_dual, n_dual, sa, dual);
    const EventEstimate bwd = estimate_event_probability(EstimatorKind::W_hat_star, r_dual, n_dual, sb, dual);
    res.units += fwd.ci.trials + bwd.ci.trials + fwd.aborted + bwd.aborted;
    res.aborted += fwd.aborted + bwd.aborted;
    const bool overlap = fwd.ci.lo <= bwd.ci.hi && bwd.ci.lo <= fwd.ci.hi;
    res.gates.push_back(make_gate("P(W_hat_3) forward vs time-reversed construction at r = " + fmt(r_dual), overlap,
                                  fmt(fwd.ci.estimate) + " vs " + fmt(bwd.ci.estimate),
                                  "overlapping 95% intervals", true));
    return res;
}

SuiteResult check_leg_mismatch_scaling(const std::vector<double>& r_grid, std::uint64_t legs, std::uint64_t seed,
                                       int workers)
{
    SuiteResult res;
    res.suite = "slope-legmismatch";
    const double r_min = *std::min_element(r_grid.begin(), r_grid.end());
    EventParams params;
    params.workers = workers;
    std::vector<EstimateCI> est;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const std::uint64_t s = derive_seed(seed, 400 + i);
        res.seeds.push_back(s);
        const std::uint64_t n = scaled_trials(legs, r_min, r_grid[i], std::min<std::uint64_t>(legs, 50'000));
        const EventEstimate e = estimate_event_probability(EstimatorKind::leg_mismatch, r_grid[i], n, s, params);
        est.push_back(e.ci);
        res.units += e.ci.trials + e.aborted;
        res.aborted += e.aborted;
    }
    const LineFit f = loglog_probability_slope(r_grid, est);
    res.gates.push_back(make_gate("slope of P(exploration differs from Z on a leg) against r",
                                  in_band(f.slope, kLegSlopeLo, kLegSlopeHi), fmt(f.slope) + " +- " + fmt(f.slope_se),
                                  fmt_range(kLegSlopeLo, kLegSlopeHi)));
    // the same fit after dividing out log^2(1/r)
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> wts;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const double p = est[i].estimate;
        if (p > 0.0 && p < 1.0) {
            const double lg = std::log(r_grid[i]);
            x.push_back(lg);
            y.push_back(std::log(p) - 2.0 * std::log(-lg));
            wts.push_back(static_cast<double>(est[i].trials) * p / (1.0 - p));
        }
    }
    if (x.size() >= 2) {
        const LineFit g = weighted_line_fit(x, y, wts);
        res.gates.push_back(make_gate("slope of P / log^2(1/r) against r", in_band(g.slope, kLegSlopeLo, kLegSlopeHi),
                                      fmt(g.slope) + " +- " + fmt(g.slope_se), fmt_range(kLegSlopeLo, kLegSlopeHi),
                                      true));
    }
    res.tables.push_back(slope_table("leg_mismatch", r_grid, est));
    return res;
}

namespace {

struct PackTally {
    std::map<int, std::uint64_t> gamma;
    std::uint64_t packs = 0;
    std::uint64_t invariant_failures = 0;
    CompensatedSum theta;
    void merge(const PackTally& o)
    {
        for (const auto& [g, c] : o.gamma) {
            gamma[g] += c;
        }
        packs += o.packs;
        invariant_failures += o.invariant_failures;
        theta += o.theta;
    }
};

}  // namespace

SuiteResult check_pack_structure(std::uint64_t packs, std::uint64_t seed, int workers)
{
    SuiteResult res;
    res.suite = "pack-structure";
    constexpr std::uint64_t kPacksPerStream = 16;
    const std::uint64_t s = derive_seed(seed, 7);
    res.seeds.push_back(s);
    const std::uint64_t streams = (packs + kPacksPerStream - 1) / kPacksPerStream;
    auto tally = run_trials<PackTally>(streams, workers, [&](std::uint64_t k, PackTally& t) {
        RngStream rng(s, k);
        PackSource src(rng);
        for (std::uint64_t i = 0; i < kPacksPerStream; ++i) {
            const Pack p = src.next();
            const std::size_t next = src.consumed() + 1;
            if (!pack_invariants_hold(p, src.stream().flight(next).xi, src.stream().flight(next + 1).xi)) {
                ++t.invariant_failures;
            }
            ++t.gamma[p.gamma];
            ++t.packs;
            t.theta.add(p.theta());
        }
    });
    auto count = [&](int g) { return tally.gamma.contains(g) ? tally.gamma.at(g) : std::uint64_t{0}; };
    const std::uint64_t forbidden = count(1) + count(3) + count(4);
    const double p2 = static_cast<double>(count(2)) / static_cast<double>(tally.packs);
    const double target = std::exp(-2.0);
    res.gates.push_back(make_gate("packs with gamma in {1,3,4}", forbidden == 0, std::to_string(forbidden) + " of " +
                                  std::to_string(tally.packs), "0"));
    res.gates.push_back(make_gate("P(gamma = 2)", std::abs(p2 - target) <= kGamma2Tol, fmt(p2),
                                  fmt(target) + " +- " + fmt(kGamma2Tol)));
    res.gates.push_back(make_gate("pack invariants", tally.invariant_failures == 0,
                                  std::to_string(tally.invariant_failures) + " failures", "0", true));
    res.notes.push_back("mean leg duration: " + fmt(tally.theta.value() / static_cast<double>(tally.packs)));
    CsvTable tab{"pack_gamma", {"gamma", "count"}, {}};
    for (const auto& [g, c] : tally.gamma) {
        tab.rows.push_back({static_cast<double>(g), static_cast<double>(c)});
    }
    res.tables.push_back(std::move(tab));
    return res;
}

SuiteResult check_green_envelopes(double r, std::uint64_t trials, std::uint64_t seed, int workers)
{
    SuiteResult res;
    res.suite = "green-envelopes";
    OccupationOptions opts;
    opts.workers = workers;
    auto run = [&](OccupationProcess p, std::uint64_t tag, std::uint64_t n) {
        const std::uint64_t s = derive_seed(seed, tag);
        res.seeds.push_back(s);
        OccupationResult o = occupation_histogram(p, r, n, s, opts);
        res.units += n;
        res.aborted += o.aborted;
        return o;
    };
    auto table = [&](OccupationProcess p, const OccupationResult& o, EnvelopeKind kind, double lo) {
        const EnvelopeFit f = fit_envelope(o.hist, kind, usable_shells(o.hist, lo, 10.0, kShellMinHits));
        res.tables.push_back(histogram_table(std::string("occupation_") + to_string(p), o.hist, &f));
    };

    const OccupationResult G = run(OccupationProcess::Y_steps, 800, trials);
    const auto near = usable_shells(G.hist, 4.0 * r, 0.5, kShellMinHits);
    const SlopeEstimate sl = shell_density_slope(G.hist, near);
    res.gates.push_back(make_gate("shell-density slope of G for 4r < |x| < 0.5",
                                  in_band(sl.slope, kGreenSlopeLo, kGreenSlopeHi),
                                  fmt(sl.slope) + " +- " + fmt(sl.se) + " on " + std::to_string(near.size()) + " shells",
                                  fmt_range(kGreenSlopeLo, kGreenSlopeHi)));

    const auto wide = usable_shells(G.hist, 4.0 * r, 10.0, kShellMinHits);
    const EnvelopeFit fit = fit_envelope(G.hist, EnvelopeKind::K_plus_L, wide);
    res.gates.push_back(make_gate("density / fitted (K + L) envelope, max/min over shells",
                                  fit.max_min_ratio < kGreenRatioMax,
                                  fmt(fit.max_min_ratio) + " (C1 " + fmt(fit.C1) + ", C2 " + fmt(fit.C2) + ", c " +
                                      fmt(fit.c) + ")",
                                  "< " + fmt(kGreenRatioMax)));
    res.tables.push_back(histogram_table("occupation_Y_steps", G.hist, &fit));

    const OccupationResult gstar = run(OccupationProcess::Zstar_steps, 801, trials / 2);
    table(OccupationProcess::Zstar_steps, gstar, EnvelopeKind::M, 1.0);
    res.gates.push_back(make_gate("occupation of the backward leg steps below |x| = 1", gstar.hist.unit_ball_mass() == 0.0,
                                  fmt(gstar.hist.unit_ball_mass() / static_cast<double>(gstar.hist.trials())) +
                                      " per leg",
                                  "0"));

    // the parts of G that the near-origin slope actually describes
    const OccupationResult later = run(OccupationProcess::Y_later_steps, 802, trials);
    table(OccupationProcess::Y_later_steps, later, EnvelopeKind::K_plus_L, 4.0 * r);
    const SlopeEstimate sl2 = shell_density_slope(later.hist, usable_shells(later.hist, 4.0 * r, 0.5, kShellMinHits));
    res.gates.push_back(make_gate("shell-density slope of Y_k, k >= 2, for 4r < |x| < 0.5",
                                  in_band(sl2.slope, kGreenSlopeLo, kGreenSlopeHi),
                                  fmt(sl2.slope) + " +- " + fmt(sl2.se), fmt_range(kGreenSlopeLo, kGreenSlopeHi), true));
    const OccupationResult first = run(OccupationProcess::Zstar_first_step, 803, trials / 2);
    table(OccupationProcess::Zstar_first_step, first, EnvelopeKind::L, 1.0);
    res.gates.push_back(make_gate("occupation of Z*_1 below |x| = 1", first.hist.unit_ball_mass() == 0.0,
                                  fmt(first.hist.unit_ball_mass()), "0", true));
    return res;
}

namespace {

/// C(s) = P(angle(-e, w_hat) < s) / (r s) and its spread around the
/// inverse-variance weighted mean.
struct EscapeFit {
    double c = 0.0;
    double first = 0.0;
    double last = 0.0;
    double worst = std::numeric_limits<double>::infinity();

    std::string describe() const
    {
        return "C = " + fmt(c) + ", C(0.02) = " + fmt(first) + ", C(0.5) = " + fmt(last) + ", max deviation " +
               fmt(worst);
    }
};

EscapeFit escape_stability(const std::vector<TailPoint>& curve, std::uint64_t samples, double r)
{
    EscapeFit out;
    double num = 0.0;
    double den = 0.0;
    std::vector<double> cs;
    for (const auto& tp : curve) {
        const double p = tp.hat_angle.estimate;
        const double c = p / (r * tp.s);
        cs.push_back(c);
        if (p > 0.0) {
            const double var = p * (1.0 - p) / static_cast<double>(samples) / (r * tp.s * r * tp.s);
            num += c / var;
            den += 1.0 / var;
        }
    }
    if (cs.empty() || den == 0.0) {
        return out;
    }
    out.c = num / den;
    out.first = cs.front();
    out.last = cs.back();
    out.worst = 0.0;
    for (double c : cs) {
        out.worst = std::max(out.worst, std::abs(c / out.c - 1.0));
    }
    return out;
}

struct MiddleTally {
    std::vector<MiddleOutcome> kept;
    std::uint64_t trapped = 0;
    std::uint64_t defocusing_fail = 0;
    std::uint64_t beta_fail = 0;
    std::uint64_t degenerate = 0;
    void merge(const MiddleTally& o)
    {
        kept.insert(kept.end(), o.kept.begin(), o.kept.end());
        trapped += o.trapped;
        defocusing_fail += o.defocusing_fail;
        beta_fail += o.beta_fail;
        degenerate += o.degenerate;
    }
};

}  // namespace

SuiteResult check_middle_lab(double r, std::uint64_t samples, std::uint64_t seed, int workers, bool tail_check_small_r)
{
    SuiteResult res;
    res.suite = "middle-lab";
    const std::uint64_t s = derive_seed(seed, 9);
    res.seeds.push_back(s);
    auto tally = run_trials<MiddleTally>(samples, workers, [&](std::uint64_t k, MiddleTally& t) {
        RngStream rng(s, k);
        const MiddleOutcome o = middle_segment_sample(rng, r);
        if (!o.in_A_hat && !o.in_A_tilde) {
            return;
        }
        if (o.in_A_tilde) {
            if (o.degenerate) {
                ++t.degenerate;
            } else {
                ++t.trapped;
                t.defocusing_fail += o.defocusing_ok ? 0 : 1;
                t.beta_fail += o.beta_bound_ok ? 0 : 1;
            }
        }
        t.kept.push_back(o);
    });
    res.units = samples;
    res.aborted = tally.degenerate;

    res.gates.push_back(make_gate("w_j.n nondecreasing on trapped samples", tally.defocusing_fail == 0 && tally.trapped > 0,
                                  std::to_string(tally.trapped - tally.defocusing_fail) + "/" +
                                      std::to_string(tally.trapped),
                                  "100%"));
    res.gates.push_back(make_gate("beta_tilde / r <= h + 1/|v.n| on trapped samples", tally.beta_fail == 0 && tally.trapped > 0,
                                  std::to_string(tally.trapped - tally.beta_fail) + "/" + std::to_string(tally.trapped),
                                  "100%"));

    const std::vector<double> beta_s = log_grid(1.0, 30.0, 12);
    const auto beta_curve = middle_tail_curves(tally.kept, samples, beta_s, r);
    std::vector<EstimateCI> beta_est;
    for (const auto& tp : beta_curve) {
        beta_est.push_back(tp.beta);
    }
    const LineFit bf = loglog_probability_slope(beta_s, beta_est);
    res.gates.push_back(make_gate("tail slope of beta_tilde / r on s in [1, 30]", in_band(bf.slope, kBetaSlopeLo, kBetaSlopeHi),
                                  fmt(bf.slope) + " +- " + fmt(bf.slope_se), fmt_range(kBetaSlopeLo, kBetaSlopeHi)));

    const std::vector<double> angle_s = log_grid(0.02, 0.5, 12);
    const EscapeFit ef = escape_stability(middle_tail_curves(tally.kept, samples, angle_s, r), samples, r);
    res.gates.push_back(make_gate("escape-angle tail of w_hat: C(s) = P/(r s) stable on s in [0.02, 0.5]",
                                  ef.worst <= kEscapeCStability, ef.describe(), "within " + fmt(kEscapeCStability * 100.0) + "%"));

    // the same tail with r ten times smaller, where s = 0.02 is no longer comparable to r
    if (tail_check_small_r) {
        const double r2 = r / 10.0;
        const std::uint64_t n2 = samples * 20;
        const std::uint64_t s2 = derive_seed(seed, 15);
        res.seeds.push_back(s2);
        auto small = run_trials<MiddleTally>(n2, workers, [&](std::uint64_t k, MiddleTally& t) {
            RngStream rng(s2, k);
            const MiddleOutcome o = middle_segment_sample(rng, r2);
            if (o.in_A_hat) {
                t.kept.push_back(o);
            }
        });
        res.units += n2;
        const EscapeFit ef2 = escape_stability(middle_tail_curves(small.kept, n2, angle_s, r2), n2, r2);
        res.gates.push_back(make_gate("escape-angle C(s) stability at r = " + fmt(r2), ef2.worst <= kEscapeCStability,
                                      ef2.describe(), "within " + fmt(kEscapeCStability * 100.0) + "%", true));
    }

    CsvTable tab{"middle_tails",
                 {"s", "hat_angle", "hat_lo", "hat_hi", "hat_envelope", "tilde_angle", "tilde_envelope", "beta",
                  "beta_lo", "beta_hi", "beta_envelope"},
                 {}};
    std::vector<double> all_s = angle_s;
    all_s.insert(all_s.end(), beta_s.begin(), beta_s.end());
    std::sort(all_s.begin(), all_s.end());
    for (const auto& tp : middle_tail_curves(tally.kept, samples, all_s, r)) {
        tab.rows.push_back({tp.s, tp.hat_angle.estimate, tp.hat_angle.lo, tp.hat_angle.hi, tp.hat_envelope,
                            tp.tilde_angle.estimate, tp.tilde_envelope, tp.beta.estimate, tp.beta.lo, tp.beta.hi,
                            tp.beta_envelope});
    }
    res.tables.push_back(std::move(tab));
    return res;
}

SuiteResult check_lambda_measures(std::uint64_t samples, std::uint64_t seed, int workers)
{
    SuiteResult res;
    res.suite = "lambda-measures";
    constexpr double kHMax = 200.0;
    const std::vector<double> sub{50.0, 100.0};
    const std::uint64_t s = derive_seed(seed, 10);
    res.seeds.push_back(s);
    const auto est = lambda_measure_estimate(samples, kHMax, s, sub, workers);
    res.units = samples;
    const LambdaEstimate& top = est.front();
    res.gates.push_back(make_gate("lambda(A_hat), lambda(A_tilde) finite and positive",
                                  std::isfinite(top.hat) && std::isfinite(top.tilde) && top.hat > 0.0 && top.tilde > 0.0,
                                  fmt(top.hat) + ", " + fmt(top.tilde), "finite"));
    const double joint = kLambdaZ * std::hypot(top.hat_se, top.tilde_se);
    res.gates.push_back(make_gate("lambda(A_hat) = lambda(A_tilde)", std::abs(top.hat - top.tilde) <= joint,
                                  "difference " + fmt(top.hat - top.tilde), "within " + fmt(joint)));
    CsvTable tab{"lambda", {"h_max", "hat", "hat_se", "tilde", "tilde_se", "truncation_bound"}, {}};
    for (const auto& le : est) {
        tab.rows.push_back({le.h_max, le.hat, le.hat_se, le.tilde, le.tilde_se, le.truncation_bound});
        if (le.h_max == kHMax) {
            continue;
        }
        const double drift = std::max(std::abs(top.hat - le.hat), std::abs(top.tilde - le.tilde));
        res.gates.push_back(make_gate("drift from h_max = " + fmt(le.h_max) + " to " + fmt(kHMax),
                                      drift < le.truncation_bound, fmt(drift), "< " + fmt(le.truncation_bound)));
    }
    res.tables.push_back(std::move(tab));
    return res;
}

SuiteResult check_sojourn_audit(std::uint64_t instances, std::uint64_t seed)
{
    SuiteResult res;
    res.suite = "sojourn-audit";
    const std::uint64_t s = derive_seed(seed, 11);
    res.seeds.push_back(s);
    RngStream rng(s, 0);
    constexpr int kBins = 16;
    std::vector<double> n_bin(kBins, 0.0);
    std::vector<double> bad_bin(kBins, 0.0);
    std::uint64_t bad = 0;
    std::uint64_t bad_acute = 0;
    std::uint64_t acute = 0;
    double worst = 0.0;
    for (std::uint64_t k = 0; k < instances; ++k) {
        const UnitVec3 e = sample_direction(rng);
        UnitVec3 w = sample_direction(rng);
        while (angle(-e, w) < kSojournMinAngle) {
            w = sample_direction(rng);
        }
        Vec3 x;
        do {
            x = Vec3{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
        } while (norm2(x) > 1.0);
        x = 2.0 * x;
        const double sv = 1.0 - rng.uniform();  // (0, 1]
        const double th = angle(-e, w);
        const double len = sojourn_length(x, w, e, sv);
        const double bound = 4.0 * sv / th;
        const bool violated = len > bound + kSojournSlack;
        const auto b = static_cast<std::size_t>(std::clamp(static_cast<int>(th / std::numbers::pi * kBins), 0, kBins - 1));
        n_bin[b] += 1.0;
        if (violated) {
            ++bad;
            bad_bin[b] += 1.0;
            worst = std::max(worst, len / bound);
        }
        if (th <= std::numbers::pi / 2.0) {
            ++acute;
            bad_acute += violated ? 1 : 0;
        }
    }
    res.units = instances;
    res.gates.push_back(make_gate("sojourn_length <= 4 s / angle(-e, w)", bad == 0,
                                  std::to_string(bad) + " violations in " + std::to_string(instances) +
                                      (bad ? ", worst ratio " + fmt(worst) : std::string{}),
                                  "0"));
    res.gates.push_back(make_gate("same bound restricted to angle(-e, w) <= pi/2", bad_acute == 0,
                                  std::to_string(bad_acute) + " violations in " + std::to_string(acute), "0", true));
    CsvTable tab{"sojourn_audit", {"angle_lo", "angle_hi", "instances", "violations"}, {}};
    for (int i = 0; i < kBins; ++i) {
        tab.rows.push_back({std::numbers::pi * i / kBins, std::numbers::pi * (i + 1) / kBins,
                            n_bin[static_cast<std::size_t>(i)], bad_bin[static_cast<std::size_t>(i)]});
    }
    res.tables.push_back(std::move(tab));
    return res;
}

SuiteResult check_diffusive(double r, double T, std::uint64_t trials, std::uint64_t seed, int workers)
{
    SuiteResult res;
    res.suite = "diffusive";
    const std::uint64_t s1 = derive_seed(seed, 12);
    const std::uint64_t s2 = derive_seed(seed, 13);
    res.seeds = {s1, s2};
    const ScalingReport rep = scaling_diagnostics(r, T, trials, s1, workers);
    res.units = trials;
    res.aborted = rep.aborted;
    for (const auto& w : rep.warnings) {
        res.notes.push_back(w);
    }

    double worst_ratio = 0.0;
    double min_p = 1.0;
    for (int c = 0; c < 3; ++c) {
        worst_ratio = std::max(worst_ratio, std::abs(rep.var_X[c] / rep.var_Y[c] - 1.0));
        min_p = std::min({min_p, rep.ks_p_X[c], rep.ks_p_Y[c]});
    }
    const double bonferroni = kPValueFloor / 6.0;
    res.gates.push_back(make_gate("endpoint variance of X / sqrt(T) against Y / sqrt(T), per coordinate",
                                  worst_ratio < kVarianceRatioTol, "max |ratio - 1| = " + fmt(worst_ratio),
                                  "< " + fmt(kVarianceRatioTol)));
    res.gates.push_back(make_gate("KS normality of endpoint coordinates (6 tests)", min_p > bonferroni,
                                  "min p = " + fmt(min_p), "> " + fmt(bonferroni)));
    res.gates.push_back(make_gate("95th percentile of sup |X - Y| / sqrt(T)", rep.sup_q95 < kSupQuantileMax,
                                  fmt(rep.sup_q95), "< " + fmt(kSupQuantileMax)));
    res.gates.push_back(make_gate("95th percentile of sup |X - Z| / sqrt(T)", rep.sup_Z_q95 < kSupQuantileMax,
                                  fmt(rep.sup_Z_q95), "< " + fmt(kSupQuantileMax), true));

    const std::uint64_t y_trials = std::max<std::uint64_t>(trials * 25, 1000);
    const auto vy = y_endpoint_variance(T, y_trials, s2, workers);
    res.units += y_trials;
    double worst_d = 0.0;
    for (double v : vy) {
        worst_d = std::max(worst_d, std::abs(v / kDiffusivity - 1.0));
    }
    res.gates.push_back(make_gate("Y diffusivity per coordinate against 2/3", worst_d < kDiffusivityTol,
                                  fmt(vy[0]) + ", " + fmt(vy[1]) + ", " + fmt(vy[2]), "within 3% of 0.6667"));
    const double gk = green_kubo_variance(T);
    double worst_gk = 0.0;
    for (double v : vy) {
        worst_gk = std::max(worst_gk, std::abs(v / gk - 1.0));
    }
    res.gates.push_back(make_gate("Y diffusivity against the finite-T value " + fmt(gk), worst_gk < kDiffusivityTol,
                                  "max relative deviation " + fmt(worst_gk), "< " + fmt(kDiffusivityTol), true));

    CsvTable msd{"msd", {"t", "msd_X", "msd_Y"}, {}};
    for (std::size_t i = 0; i < rep.msd_t.size(); ++i) {
        msd.rows.push_back({rep.msd_t[i], rep.msd_X[i], rep.msd_Y[i]});
    }
    res.tables.push_back(std::move(msd));
    CsvTable sup{"sup_deviation", {"trial", "sup_dev_Y", "sup_dev_Z"}, {}};
    for (std::size_t i = 0; i < rep.sup_dev.size(); ++i) {
        sup.rows.push_back({static_cast<double>(i), rep.sup_dev[i], rep.sup_dev_Z[i]});
    }
    res.tables.push_back(std::move(sup));
    res.notes.push_back("fraction of trials with a mismatch before T: " + fmt(rep.mismatch_fraction));
    return res;
}

// ---------------------------------------------------------------------------

namespace {

struct SuiteInfo {
    const char* name;
    const char* help;
};

const SuiteInfo kSuites[] = {
    {"smoke",
     "Small end-to-end run at r = 0.05 (100 trials): coupling identity, eta frequency, the middle-segment "
     "tails, one exploration trace and per-leg event counts. Finishes in well under a second."},
    {"oracle-equivalence",
     "Exploration against a direct billiard in a Poisson field of density 1/(pi r^2): first-collision time "
     "against Exp(1), collision counts in [0,5], and the law of the scattering cosine. Default r = 0.05, "
     "10^4 trials (10^5 scatterings)."},
    {"slope-eta",
     "E[eta_j] and E[eta_j eta_j+1] over the r grid (default 0.04, 0.02, 0.01, 0.005) with 10^7 flights per r; "
     "log-log slopes near 1 and 2."},
    {"slope-interleg",
     "Per-leg frequency of shadowing or bumping between a leg of Z and the earlier legs over the r grid; 10^6 legs "
     "at the smallest r, fewer (scaled by r^2) at larger r. Also compares the forward and time-reversed "
     "constructions of the shadowing event."},
    {"slope-legmismatch",
     "Per-leg frequency of the exploration differing from Z over the r grid; 10^6 legs at the smallest r."},
    {"green-envelopes",
     "Radial occupation histograms of Y and of the backward leg process Z* (default r = 0.01, 2 x 10^5 trials): "
     "near-origin slope of G, the (K + L) envelope ratio and the empty unit ball of the backward leg steps."},
    {"middle-lab",
     "Two-scatterer middle segment at r = 0.01 with 10^6 samples: defocusing chain and pathwise time bound on "
     "trapped samples, tail of the trapping time and the escape-angle tail."},
    {"lambda-measures",
     "Lebesgue measures of the two trapping sets by uniform sampling of h in [0, 200] (10^7 samples), with "
     "the drift against h_max = 50 and 100."},
    {"diffusive",
     "X and Y up to T = 100 at r = 0.01 (2000 trials): endpoint variances, normality, sup |X - Y| / sqrt(T), "
     "and the diffusivity of Y from 5 x 10^4 Y-only trials."},
    {"consistency-audit",
     "Coupling identity (r = 0.01, T = 20, 10^4 trials), pack statistics (10^6 packs) and the randomized audit of "
     "the sojourn bound (10^5 instances)."},
};

double single_r(const RunConfig& cfg, double fallback)
{
    return cfg.r_grid.empty() ? fallback : cfg.r_grid.front();
}

std::uint64_t pick(std::uint64_t configured, std::uint64_t fallback)
{
    return configured > 0 ? configured : fallback;
}

}  // namespace

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& s : kSuites) {
            v.emplace_back(s.name);
        }
        return v;
    }();
    return names;
}

std::string suite_help(const std::string& name)
{
    for (const auto& s : kSuites) {
        if (name == s.name) {
            return s.help;
        }
    }
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

void validate(const RunConfig& cfg)
{
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
        throw std::invalid_argument("experiment: unknown suite '" + cfg.experiment + "'");
    }
    for (double r : cfg.r_grid) {
        if (!(r > 0.0 && r < 0.5)) {
            throw std::invalid_argument("r: " + fmt(r) + " is outside (0, 0.5)");
        }
    }
    if (!(cfg.T >= 0.0) || !std::isfinite(cfg.T)) {
        throw std::invalid_argument("T: must be a finite nonnegative number");
    }
    if (cfg.workers < 1) {
        throw std::invalid_argument("workers: must be at least 1");
    }
}

CsvTable exploration_trace_table(const ExplorationResult& x)
{
    CsvTable t{"exploration_trace", {"t", "x", "y", "z", "event"}, {}};
    auto row = [&](double when, double kind) {
        const Vec3 q = x.path.position(when);
        t.rows.push_back({when, q.x, q.y, q.z, kind});
    };
    row(x.path.start_time(), 0.0);
    for (const auto& e : x.events.records) {
        row(e.t, static_cast<double>(static_cast<int>(e.kind) + 1));
    }
    row(x.path.end_time(), 0.0);
    return t;
}

CsvTable leg_events_table(double r, std::uint64_t legs, std::uint64_t seed)
{
    CsvTable t{"legs", {"leg", "gamma", "theta", "eta_hat", "eta_tilde", "mismatch", "convention_discrepancies"}, {}};
    RngStream rng(seed, 0);
    PackSource src(rng);
    for (std::uint64_t n = 0; n < legs; ++n) {
        const std::size_t before = src.consumed();
        const Pack p = src.next();
        const FlightStream& fs = src.stream();
        LegTriple leg;
        try {
            leg = build_leg_X(p, fs.u(before), fs.u(src.consumed() + 1), r);
        } catch (const DegenerateGeometry&) {
            continue;
        } catch (const BudgetExhausted&) {
            continue;
        }
        double hat = 0.0;
        double tilde = 0.0;
        for (const auto& e : leg.eta) {
            hat += e.eta_hat ? 1.0 : 0.0;
            tilde += e.eta_tilde ? 1.0 : 0.0;
        }
        t.rows.push_back({static_cast<double>(n + 1), static_cast<double>(p.gamma), p.theta(), hat, tilde,
                          leg.mismatch ? 1.0 : 0.0, static_cast<double>(leg.zdiag.convention_discrepancies)});
    }
    return t;
}

SuiteResult run_suite(const RunConfig& cfg)
{
    validate(cfg);
    const std::string& e = cfg.experiment;
    const std::uint64_t seed = cfg.seed;
    const int w = cfg.workers;
    const std::vector<double> default_grid{0.04, 0.02, 0.01, 0.005};
    const std::vector<double>& grid = cfg.r_grid.size() > 1 ? cfg.r_grid : default_grid;
    SuiteResult out;
    out.suite = e;

    if (e == "smoke") {
        const double r = single_r(cfg, 0.05);
        const std::uint64_t n = pick(cfg.trials, 100);
        const double T = cfg.T > 0.0 ? cfg.T : 10.0;
        out.absorb(check_coupling_identity(r, T, n, seed, w));
        EventParams params;
        params.workers = w;
        const std::uint64_t s = derive_seed(seed, 14);
        out.seeds.push_back(s);
        const EventEstimate eta = estimate_event_probability(EstimatorKind::eta, r, n * 100, s, params);
        out.units += eta.ci.trials + eta.aborted;
        out.aborted += eta.aborted;
        out.tables.push_back(slope_table("eta", {r}, {eta.ci}));
        {
            const std::uint64_t st = derive_seed(seed, 16);
            out.seeds.push_back(st);
            RngStream trng(st, 0);
            out.tables.push_back(exploration_trace_table(explore(generate_flight_stream(trng, T), r, T)));
            const std::uint64_t sl = derive_seed(seed, 17);
            out.seeds.push_back(sl);
            out.tables.push_back(leg_events_table(r, n, sl));
        }
        out.gates.push_back(make_gate("eta frequency is positive and below 1", eta.ci.estimate > 0.0 && eta.ci.estimate < 1.0,
                                      fmt(eta.ci.estimate), "(0, 1)"));
        SuiteResult mid = check_middle_lab(std::min(r, 0.49), n * 100, seed, w, false);
        for (auto& g : mid.gates) {
            g.informational = true;  // far too few samples for the tail gates
        }
        out.absorb(std::move(mid));
        out.suite = e;
        return out;
    }
    if (e == "oracle-equivalence") {
        const double r = single_r(cfg, 0.05);
        const std::uint64_t n = pick(cfg.trials, 10'000);
        out.absorb(check_oracle_equivalence(r, n, seed, w));
        out.absorb(check_uniform_scattering(r, n * 10, seed, w));
    } else if (e == "slope-eta") {
        out.absorb(check_eta_scaling(grid, pick(cfg.trials, 10'000'000), seed, w));
    } else if (e == "slope-interleg") {
        out.absorb(check_interleg_scaling(grid, pick(cfg.trials, 1'000'000), seed, w));
    } else if (e == "slope-legmismatch") {
        out.absorb(check_leg_mismatch_scaling(grid, pick(cfg.trials, 1'000'000), seed, w));
    } else if (e == "green-envelopes") {
        out.absorb(check_green_envelopes(single_r(cfg, 0.01), pick(cfg.trials, 200'000), seed, w));
    } else if (e == "middle-lab") {
        out.absorb(check_middle_lab(single_r(cfg, 0.01), pick(cfg.trials, 1'000'000), seed, w, true));
    } else if (e == "lambda-measures") {
        out.absorb(check_lambda_measures(pick(cfg.trials, 10'000'000), seed, w));
    } else if (e == "diffusive") {
        out.absorb(check_diffusive(single_r(cfg, 0.01), cfg.T > 0.0 ? cfg.T : 100.0, pick(cfg.trials, 2000), seed, w));
    } else if (e == "consistency-audit") {
        const std::uint64_t n = pick(cfg.trials, 10'000);
        out.absorb(check_coupling_identity(single_r(cfg, 0.01), cfg.T > 0.0 ? cfg.T : 20.0, n, seed, w));
        out.absorb(check_pack_structure(n * 100, seed, w));
        out.absorb(check_sojourn_audit(n * 10, seed));
        const std::uint64_t sl = derive_seed(seed, 17);
        out.seeds.push_back(sl);
        CsvTable legs = leg_events_table(single_r(cfg, 0.01), n / 10, sl);
        double disc = 0.0;
        double eta_legs = 0.0;
        for (const auto& row : legs.rows) {
            disc += row[6];
            eta_legs += row[3] + row[4] > 0.0 ? 1.0 : 0.0;
        }
        out.notes.push_back("legs with an eta event: " + fmt(eta_legs) + " of " + std::to_string(legs.rows.size()) +
                            "; indicator/two-ball convention discrepancies: " + fmt(disc));
        out.tables.push_back(std::move(legs));
    }
    out.suite = e;
    return out;
}

void write_csv(const CsvTable& table, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / (table.name + ".csv");
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    os << "# schema=1\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        os << (i ? "," : "") << table.columns[i];
    }
    os << '\n';
    char buf[32];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            os << (i ? "," : "") << buf;
        }
        os << '\n';
    }
}

}  // namespace lorentz
