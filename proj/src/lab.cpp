#include "lorentz/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "lorentz/exploration.hpp"
#include "lorentz/parallel.hpp"

namespace lorentz {

int default_workers()
{
    if (const char* env = std::getenv("LORENTZ_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr std::pair<EstimatorKind, const char*> kKindNames[] = {
    {EstimatorKind::eta, "eta"},
    {EstimatorKind::eta_pair, "eta_pair"},
    {EstimatorKind::W_hat, "W_hat"},
    {EstimatorKind::W_tilde, "W_tilde"},
    {EstimatorKind::interleg, "interleg"},
    {EstimatorKind::interleg_hat, "interleg_hat"},
    {EstimatorKind::W_hat_star, "W_hat_star"},
    {EstimatorKind::leg_mismatch, "leg_mismatch"},
    {EstimatorKind::first_mismatch_before_T, "first_mismatch_before_T"},
};

constexpr std::pair<OccupationProcess, const char*> kProcessNames[] = {
    {OccupationProcess::Y_first_step, "Y_first_step"},
    {OccupationProcess::Y_steps, "Y_steps"},
    {OccupationProcess::Y_later_steps, "Y_later_steps"},
    {OccupationProcess::Y_path, "Y_path"},
    {OccupationProcess::Zleg_steps, "Zleg_steps"},
    {OccupationProcess::Zleg_path, "Zleg_path"},
    {OccupationProcess::Zstar_first_step, "Zstar_first_step"},
    {OccupationProcess::Zstar_steps, "Zstar_steps"},
    {OccupationProcess::Zstar_path, "Zstar_path"},
    {OccupationProcess::Zstar_all_steps, "Zstar_all_steps"},
    {OccupationProcess::Zstar_all_path, "Zstar_all_path"},
    {OccupationProcess::Xi_star_walk, "Xi_star_walk"},
};

void append_path(PiecewisePath& dst, const PiecewisePath& src)
{
    const auto& ts = src.times();
    const auto& vel = src.velocities();
    for (std::size_t i = 0; i < vel.size(); ++i) {
        dst.extend(vel[i], ts[i + 1] - ts[i]);
    }
}

struct CountTally {
    std::uint64_t successes = 0;
    std::uint64_t units = 0;
    std::uint64_t aborted = 0;
    std::uint64_t pv_hat = 0;
    std::uint64_t pv_tilde = 0;
    void merge(const CountTally& o)
    {
        successes += o.successes;
        units += o.units;
        aborted += o.aborted;
        pv_hat += o.pv_hat;
        pv_tilde += o.pv_tilde;
    }
};

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b)
{
    return (a + b - 1) / b;
}

FlightStream stream_with(RngStream& rng, std::size_t flights)
{
    FlightStream fs = generate_flight_stream(rng, 0.0);
    extend_flight_stream(fs, rng, flights);
    return fs;
}

}  // namespace

const char* to_string(EstimatorKind kind)
{
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "?";
}

std::optional<EstimatorKind> parse_estimator_kind(const std::string& name)
{
    for (const auto& [k, n] : kKindNames) {
        if (name == n) {
            return k;
        }
    }
    return std::nullopt;
}

const char* to_string(OccupationProcess p)
{
    for (const auto& [k, name] : kProcessNames) {
        if (k == p) {
            return name;
        }
    }
    return "?";
}

std::optional<OccupationProcess> parse_occupation_process(const std::string& name)
{
    for (const auto& [k, n] : kProcessNames) {
        if (name == n) {
            return k;
        }
    }
    return std::nullopt;
}

InterlegEvents y_flight_events(const FlightStream& fs, std::size_t j, double r)
{
    if (j < 1 || fs.size() < j + 1) {
        throw std::out_of_range("y_flight_events needs flights 1..j+1");
    }
    PiecewisePath y;
    y.incoming = fs.u0;
    std::vector<double> leg_end;
    leg_end.reserve(j);
    double t = 0.0;
    for (std::size_t k = 1; k <= j; ++k) {
        y.extend(fs.u(k), fs.flight(k).xi);
        t += fs.flight(k).xi;
        leg_end.push_back(t);
    }
    y.outgoing = fs.u(j + 1);
    return interleg_events(y, leg_end, r).back();
}

ConcatenatedZ concatenate_Z_legs(const UnitVec3& u0, const std::vector<Pack>& packs, const UnitVec3& u_after,
                                 double r)
{
    ConcatenatedZ cz;
    cz.path.incoming = u0;
    UnitVec3 z_in = u0;
    for (std::size_t n = 0; n < packs.size(); ++n) {
        const Pack& p = packs[n];
        const UnitVec3 u_out = n + 1 < packs.size() ? packs[n + 1].flights.front().u : u_after;
        const ZResult z = build_leg_Z_result(p, r, z_in, u_out);
        append_path(cz.path, z.path);
        cz.leg_end.push_back(cz.path.end_time());
        z_in = p.flights.back().u;
    }
    cz.path.outgoing = u_after;
    return cz;
}

PiecewisePath concatenate_Z_star_legs(const std::vector<Pack>& packs, double r)
{
    PiecewisePath path;
    for (const Pack& p : packs) {
        append_path(path, build_leg_Z_star(p, r));
    }
    return path;
}

EventEstimate estimate_event_probability(EstimatorKind kind, double r, std::uint64_t trials, std::uint64_t seed,
                                         const EventParams& params)
{
    if (trials == 0) {
        throw std::invalid_argument("estimate_event_probability: zero trials");
    }
    if (!(r > 0.0 && r < 0.5)) {
        throw std::invalid_argument("estimate_event_probability: r must lie in (0, 0.5)");
    }
    const std::size_t N = std::max<std::size_t>(params.stream_flights, 8);
    const std::size_t legs = std::max<std::size_t>(params.legs, 2);
    std::uint64_t per_stream = 1;
    switch (kind) {
    case EstimatorKind::eta:
        per_stream = N - 2;
        break;
    case EstimatorKind::eta_pair:
        per_stream = N - 3;
        break;
    case EstimatorKind::interleg:
        per_stream = legs - 1;
        break;
    case EstimatorKind::leg_mismatch:
        per_stream = legs;
        break;
    default:
        break;
    }
    const std::uint64_t streams = ceil_div(trials, per_stream);

    auto trial = [&](std::uint64_t k, CountTally& t) {
        RngStream rng(seed, k);
        switch (kind) {
        case EstimatorKind::eta:
        case EstimatorKind::eta_pair: {
            const FlightStream fs = stream_with(rng, N);
            bool prev = false;
            for (std::size_t j = 3; j <= N; ++j) {
                const Flight& a = fs.flight(j - 2);
                const Flight& b = fs.flight(j - 1);
                const Flight& c = fs.flight(j);
                const EtaBits e = eta_indicators(a.xi, a.u, b.xi, b.u, c.xi, c.u, r);
                const bool eta = e.hat || e.tilde;
                if (b.xi < 1.0) {
                    const EtaBits ep = eta_prime_indicators(b.xi, a.u, b.u, c.u, r);
                    t.pv_hat += (e.hat && !ep.hat) ? 1 : 0;
                    t.pv_tilde += (e.tilde && !ep.tilde) ? 1 : 0;
                }
                if (kind == EstimatorKind::eta) {
                    ++t.units;
                    t.successes += eta ? 1 : 0;
                } else if (j >= 4) {
                    ++t.units;
                    t.successes += (eta && prev) ? 1 : 0;
                }
                prev = eta;
            }
            return;
        }
        case EstimatorKind::W_hat:
        case EstimatorKind::W_tilde: {
            const FlightStream fs = stream_with(rng, params.j + 1);
            const InterlegEvents ev = y_flight_events(fs, params.j, r);
            ++t.units;
            t.successes += (kind == EstimatorKind::W_hat ? ev.w_hat : ev.w_tilde) ? 1 : 0;
            return;
        }
        case EstimatorKind::interleg:
        case EstimatorKind::interleg_hat: {
            const std::size_t n_legs = kind == EstimatorKind::interleg ? legs : std::max<std::size_t>(params.j, 2);
            const std::uint64_t units = kind == EstimatorKind::interleg ? n_legs - 1 : 1;
            try {
                PackSource src(rng);
                std::vector<Pack> packs;
                for (std::size_t n = 0; n < n_legs; ++n) {
                    packs.push_back(src.next());
                }
                const UnitVec3 u_after = src.stream().u(src.consumed() + 1);
                const ConcatenatedZ cz = concatenate_Z_legs(src.stream().u0, packs, u_after, r);
                const auto ev = interleg_events(cz.path, cz.leg_end, r);
                CountTally local;
                if (kind == EstimatorKind::interleg) {
                    for (std::size_t j = 1; j < ev.size(); ++j) {
                        ++local.units;
                        local.successes += (ev[j].w_hat || ev[j].w_tilde) ? 1 : 0;
                    }
                } else {
                    ++local.units;
                    local.successes += ev.back().w_hat ? 1 : 0;
                }
                t.merge(local);
            } catch (const DegenerateGeometry&) {
                t.aborted += units;
            } catch (const BudgetExhausted&) {
                t.aborted += units;
            }
            return;
        }
        case EstimatorKind::W_hat_star: {
            try {
                PackSource src(rng);
                const Pack fwd = src.next();
                RngStream aux(derive_seed(seed, 0x57A2), k);
                const UnitVec3 u_out = sample_direction(aux);
                const ZResult z = build_leg_Z_result(fwd, r, std::nullopt, u_out);
                std::vector<Vec3> centers;
                for (const auto& s : path_scatterers(z.path, r)) {
                    if (s.t > 0.0) {
                        centers.push_back(s.center);
                    }
                }
                std::vector<Pack> past;
                for (std::size_t n = 1; n < std::max<std::size_t>(params.j, 2); ++n) {
                    past.push_back(src.next());
                }
                const PiecewisePath back = concatenate_Z_star_legs(past, r);
                const double d = min_distance_points_to_path(back, centers, r);
                ++t.units;
                t.successes += d < r * (1.0 - kGeomRelTol) ? 1 : 0;
            } catch (const DegenerateGeometry&) {
                ++t.aborted;
            } catch (const BudgetExhausted&) {
                ++t.aborted;
            }
            return;
        }
        case EstimatorKind::leg_mismatch: {
            PackSource src(rng);
            UnitVec3 u_in = src.stream().u0;
            for (std::size_t n = 0; n < legs; ++n) {
                const Pack p = src.next();
                const UnitVec3 u_out = src.stream().u(src.consumed() + 1);
                try {
                    const LegTriple leg = build_leg_X(p, u_in, u_out, r);
                    ++t.units;
                    t.successes += leg.mismatch ? 1 : 0;
                } catch (const DegenerateGeometry&) {
                    ++t.aborted;
                } catch (const BudgetExhausted&) {
                    ++t.aborted;
                }
                u_in = p.flights.back().u;
            }
            return;
        }
        case EstimatorKind::first_mismatch_before_T: {
            const FlightStream fs = generate_flight_stream(rng, params.T);
            try {
                const ExplorationResult x = explore(fs, r, params.T);
                ++t.units;
                t.successes += (x.first_mismatch && *x.first_mismatch < params.T) ? 1 : 0;
            } catch (const DegenerateGeometry&) {
                ++t.aborted;
            } catch (const BudgetExhausted&) {
                ++t.aborted;
            }
            return;
        }
        }
    };

    const CountTally total = run_trials<CountTally>(streams, params.workers, trial);
    EventEstimate est;
    est.aborted = total.aborted;
    est.prime_violations_hat = total.pv_hat;
    est.prime_violations_tilde = total.pv_tilde;
    if (total.units == 0) {
        throw std::runtime_error("estimate_event_probability: every trial aborted");
    }
    est.ci = wilson_ci(total.successes, total.units);
    return est;
}

namespace {

/// Adds the part of `path` (offset by `shift`) with time in (0, t_end].
void add_path_until(RadialHistogram& h, const PiecewisePath& path, const Vec3& shift, double t_end)
{
    const auto& ts = path.times();
    const auto& pts = path.points();
    const auto& vel = path.velocities();
    for (std::size_t i = 0; i < vel.size() && ts[i] < t_end; ++i) {
        const double len = std::min(ts[i + 1], t_end) - ts[i];
        h.add_segment(pts[i] + shift, vel[i], len);
    }
}

struct HistTally {
    std::optional<RadialHistogram> hist;
    std::uint64_t aborted = 0;
    void merge(const HistTally& o)
    {
        if (o.hist) {
            if (hist) {
                hist->merge(*o.hist);
            } else {
                hist = o.hist;
            }
        }
        aborted += o.aborted;
    }
};

/// Z*_k = N*_{gamma-k} - N*_gamma for k = 1..gamma, from the forward nodes on the reversed pack.
std::vector<Vec3> z_star_nodes(const Pack& p, double r)
{
    const ZResult zr = build_leg_Z_result(reverse_pack(p), r);
    const std::size_t g = zr.nodes.size() - 1;
    std::vector<Vec3> out;
    out.reserve(g);
    for (std::size_t k = 1; k <= g; ++k) {
        out.push_back(zr.nodes[g - k] - zr.nodes[g]);
    }
    return out;
}

/// Occupation density after time T0 of a walk with per-coordinate diffusivity 1/3,
/// from the Gaussian heat kernel bound sup_x p_t(x) = (4 pi D t)^(-3/2).
double diffusive_tail_density(double T0)
{
    constexpr double D = 1.0 / 3.0;
    return std::pow(4.0 * std::numbers::pi * D, -1.5) * 2.0 / std::sqrt(T0);
}

}  // namespace

OccupationResult occupation_histogram(OccupationProcess process, double r, std::uint64_t trials, std::uint64_t seed,
                                      const OccupationOptions& opts)
{
    if (!(r > 0.0 && r < 0.5)) {
        throw std::invalid_argument("occupation_histogram: r must lie in (0, 0.5)");
    }
    const double horizon = opts.horizon;
    auto trial = [&](std::uint64_t k, HistTally& t) {
        if (!t.hist) {
            t.hist.emplace(r);
        }
        RadialHistogram& h = *t.hist;
        RngStream rng(seed, k);
        RadialHistogram local(r);
        local.add_trial();
        try {
            switch (process) {
            case OccupationProcess::Y_first_step:
            case OccupationProcess::Y_steps:
            case OccupationProcess::Y_later_steps:
            case OccupationProcess::Y_path: {
                const FlightStream fs = generate_flight_stream(rng, horizon);
                if (process == OccupationProcess::Y_path) {
                    add_path_until(local, build_Y(fs), Vec3{}, horizon);
                    break;
                }
                Vec3 y{};
                double tau = 0.0;
                for (std::size_t j = 1; j <= fs.size(); ++j) {
                    y += fs.flight(j).xi * fs.u(j).vec();
                    tau += fs.flight(j).xi;
                    if (tau > horizon) {
                        break;
                    }
                    if (process == OccupationProcess::Y_steps || (process == OccupationProcess::Y_later_steps && j >= 2)
                        || (process == OccupationProcess::Y_first_step && j == 1)) {
                        local.add_point(y);
                    }
                    if (process == OccupationProcess::Y_first_step) {
                        break;
                    }
                }
                break;
            }
            case OccupationProcess::Zleg_steps:
            case OccupationProcess::Zleg_path: {
                PackSource src(rng);
                const ZResult z = build_leg_Z_result(src.next(), r);
                if (process == OccupationProcess::Zleg_path) {
                    add_path_until(local, z.path, Vec3{}, z.path.end_time());
                } else {
                    for (std::size_t j = 1; j < z.nodes.size(); ++j) {
                        local.add_point(z.nodes[j]);
                    }
                }
                break;
            }
            case OccupationProcess::Zstar_first_step:
            case OccupationProcess::Zstar_steps:
            case OccupationProcess::Zstar_path: {
                PackSource src(rng);
                const Pack p = src.next();
                if (process == OccupationProcess::Zstar_path) {
                    const PiecewisePath zs = build_leg_Z_star(p, r);
                    add_path_until(local, zs, Vec3{}, zs.end_time());
                } else {
                    const auto nodes = z_star_nodes(p, r);
                    for (std::size_t kk = 0; kk < nodes.size(); ++kk) {
                        local.add_point(nodes[kk]);
                        if (process == OccupationProcess::Zstar_first_step) {
                            break;
                        }
                    }
                }
                break;
            }
            case OccupationProcess::Zstar_all_steps:
            case OccupationProcess::Zstar_all_path:
            case OccupationProcess::Xi_star_walk: {
                PackSource src(rng);
                Vec3 xi_star{};
                double theta = 0.0;
                while (theta < horizon) {
                    const Pack p = src.next();
                    if (process == OccupationProcess::Zstar_all_path) {
                        const PiecewisePath zs = build_leg_Z_star(p, r);
                        add_path_until(local, zs, xi_star, horizon - theta);
                        xi_star += zs.end();
                    } else {
                        const auto nodes = z_star_nodes(p, r);
                        if (process == OccupationProcess::Zstar_all_steps) {
                            double tk = theta;
                            for (std::size_t kk = 0; kk < nodes.size(); ++kk) {
                                tk += p.flights[kk].xi;
                                if (tk > horizon) {
                                    break;
                                }
                                local.add_point(xi_star + nodes[kk]);
                            }
                        }
                        xi_star += nodes.back();
                        if (process == OccupationProcess::Xi_star_walk && theta + p.theta() <= horizon) {
                            local.add_point(xi_star);
                        }
                    }
                    theta += p.theta();
                }
                break;
            }
            }
        } catch (const DegenerateGeometry&) {
            ++t.aborted;
            return;
        } catch (const BudgetExhausted&) {
            ++t.aborted;
            return;
        }
        h.merge(local);
    };
    const HistTally total = run_trials<HistTally>(trials, opts.workers, trial);
    OccupationResult res{total.hist ? *total.hist : RadialHistogram(r), total.aborted, 0.0};
    switch (process) {
    case OccupationProcess::Y_steps:
    case OccupationProcess::Y_later_steps:
    case OccupationProcess::Y_path:
    case OccupationProcess::Zstar_all_steps:
    case OccupationProcess::Zstar_all_path:
    case OccupationProcess::Xi_star_walk:
        res.truncation_bound = diffusive_tail_density(horizon);
        break;
    default:
        break;  // single legs and single steps are recorded in full
    }
    return res;
}

double green_kubo_variance(double T)
{
    return (2.0 * T - 2.0 * (1.0 - std::exp(-T))) / (3.0 * T);
}

namespace {

constexpr int kMsdPoints = 20;

struct ScalingTally {
    std::vector<double> sup;
    std::vector<double> sup_z;
    std::array<std::vector<double>, 3> x_end;
    std::array<std::vector<double>, 3> y_end;
    std::array<CompensatedSum, kMsdPoints> msd_x;
    std::array<CompensatedSum, kMsdPoints> msd_y;
    std::uint64_t mismatches = 0;
    std::uint64_t aborted = 0;
    void merge(const ScalingTally& o)
    {
        sup.insert(sup.end(), o.sup.begin(), o.sup.end());
        sup_z.insert(sup_z.end(), o.sup_z.begin(), o.sup_z.end());
        for (int c = 0; c < 3; ++c) {
            x_end[c].insert(x_end[c].end(), o.x_end[c].begin(), o.x_end[c].end());
            y_end[c].insert(y_end[c].end(), o.y_end[c].begin(), o.y_end[c].end());
        }
        for (int i = 0; i < kMsdPoints; ++i) {
            msd_x[i] += o.msd_x[i];
            msd_y[i] += o.msd_y[i];
        }
        mismatches += o.mismatches;
        aborted += o.aborted;
    }
};

double normality_p(const std::vector<double>& xs)
{
    const double sd = std::sqrt(variance(xs));
    const boost::math::normal law(0.0, sd);
    return ks_one_sample(xs, [&](double x) { return boost::math::cdf(law, x); }).p_value;
}

}  // namespace

ScalingReport scaling_diagnostics(double r, double T, std::uint64_t trials, std::uint64_t seed, int workers)
{
    if (!(r > 0.0 && r < 0.5) || !(T > 0.0) || trials < 2) {
        throw std::invalid_argument("scaling_diagnostics: need 0 < r < 0.5, T > 0 and at least two trials");
    }
    ScalingReport rep;
    rep.r = r;
    rep.T = T;
    const double lr = std::abs(std::log(r));
    if (r * r * lr * lr * T > 0.25) {
        rep.warnings.push_back("r^2 |log r|^2 T is not small: outside the regime where X and Y stay close");
    }
    if (r * T > 1.0) {
        rep.warnings.push_back("r T exceeds 1: mismatches before T are likely");
    }
    const double sq = std::sqrt(T);
    auto trial = [&](std::uint64_t k, ScalingTally& t) {
        RngStream rng(seed, k);
        const FlightStream fs = generate_flight_stream(rng, T);
        try {
            const ExplorationResult x = explore(fs, r, T);
            const PiecewisePath y = build_Y(fs);
            const ZResult z = build_Z(fs, r, T);
            t.sup.push_back(max_deviation(x.path, y) / sq);
            t.sup_z.push_back(max_deviation(x.path, z.path) / sq);
            const Vec3 xe = x.path.position(T) / sq;
            const Vec3 ye = y.position(T) / sq;
            for (int c = 0; c < 3; ++c) {
                t.x_end[c].push_back(xe[c]);
                t.y_end[c].push_back(ye[c]);
            }
            for (int i = 0; i < kMsdPoints; ++i) {
                const double ti = T * (i + 1) / kMsdPoints;
                t.msd_x[i].add(norm2(x.path.position(ti)));
                t.msd_y[i].add(norm2(y.position(ti)));
            }
            t.mismatches += (x.first_mismatch && *x.first_mismatch < T) ? 1 : 0;
        } catch (const DegenerateGeometry&) {
            ++t.aborted;
        } catch (const BudgetExhausted&) {
            ++t.aborted;
        }
    };
    const ScalingTally tot = run_trials<ScalingTally>(trials, workers, trial);
    rep.trials = tot.sup.size();
    rep.aborted = tot.aborted;
    if (rep.trials < 2) {
        throw std::runtime_error("scaling_diagnostics: too few completed trials");
    }
    rep.sup_dev = tot.sup;
    rep.sup_q50 = quantile(tot.sup, 0.50);
    rep.sup_q90 = quantile(tot.sup, 0.90);
    rep.sup_q95 = quantile(tot.sup, 0.95);
    rep.sup_q99 = quantile(tot.sup, 0.99);
    rep.sup_dev_Z = tot.sup_z;
    rep.sup_Z_q95 = quantile(tot.sup_z, 0.95);
    rep.mismatch_fraction = static_cast<double>(tot.mismatches) / static_cast<double>(rep.trials);
    for (int c = 0; c < 3; ++c) {
        rep.var_X[c] = variance(tot.x_end[c]);
        rep.var_Y[c] = variance(tot.y_end[c]);
        rep.ks_p_X[c] = normality_p(tot.x_end[c]);
        rep.ks_p_Y[c] = normality_p(tot.y_end[c]);
    }
    const double n = static_cast<double>(rep.trials);
    for (int a = 0; a < 3; ++a) {
        const double ma = mean(tot.x_end[a]);
        for (int b = 0; b < 3; ++b) {
            const double mb = mean(tot.x_end[b]);
            CompensatedSum s;
            for (std::size_t i = 0; i < rep.trials; ++i) {
                s.add((tot.x_end[a][i] - ma) * (tot.x_end[b][i] - mb));
            }
            rep.cov_X[a][b] = s.value() / (n - 1.0);
        }
    }
    for (int i = 0; i < kMsdPoints; ++i) {
        rep.msd_t.push_back(T * (i + 1) / kMsdPoints);
        rep.msd_X.push_back(tot.msd_x[i].value() / n);
        rep.msd_Y.push_back(tot.msd_y[i].value() / n);
    }
    return rep;
}

std::array<double, 3> y_endpoint_variance(double T, std::uint64_t trials, std::uint64_t seed, int workers)
{
    struct Tally {
        std::array<std::vector<double>, 3> end;
        void merge(const Tally& o)
        {
            for (int c = 0; c < 3; ++c) {
                end[c].insert(end[c].end(), o.end[c].begin(), o.end[c].end());
            }
        }
    };
    const double sq = std::sqrt(T);
    const Tally tot = run_trials<Tally>(trials, workers, [&](std::uint64_t k, Tally& t) {
        RngStream rng(seed, k);
        const FlightStream fs = generate_flight_stream(rng, T);
        Vec3 y{};
        double tau = 0.0;
        for (const auto& f : fs.flights) {
            const double dt = std::min(f.xi, T - tau);
            y += dt * f.u.vec();
            tau += f.xi;
            if (tau >= T) {
                break;
            }
        }
        for (int c = 0; c < 3; ++c) {
            t.end[c].push_back(y[c] / sq);
        }
    });
    return {variance(tot.end[0]), variance(tot.end[1]), variance(tot.end[2])};
}

}  // namespace lorentz
