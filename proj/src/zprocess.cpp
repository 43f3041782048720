#include "lorentz/zprocess.hpp"

#include <algorithm>
#include <cmath>

namespace lorentz {

namespace {

constexpr double kMatchTol = 1e-9;

UnitVec3 direction_of(const Vec3& y)
{
    return UnitVec3::normalized(y);
}

/// Appends src's segments to dst (positions re-accumulated from dst's end).
void append_path(PiecewisePath& dst, const PiecewisePath& src)
{
    const auto& ts = src.times();
    const auto& vel = src.velocities();
    for (std::size_t i = 0; i < vel.size(); ++i) {
        dst.extend(vel[i], ts[i + 1] - ts[i]);
    }
}

}  // namespace

EtaBits eta_indicators(double xi_prev2, const UnitVec3& u_prev2, double xi_prev, const UnitVec3& u_prev,
                       double xi_cur, const UnitVec3& u_cur, double r)
{
    EtaBits out;
    if (!(xi_prev < 1.0)) {
        return out;
    }
    const Vec3 y_prev = xi_prev * u_prev.vec();
    const Vec3 cand = y_prev + scatterer_center(Vec3{}, u_prev, u_cur, r);
    out.hat = point_segment_distance(cand, Vec3{}, -u_prev2, xi_prev2) < r;
    const Vec3 old = y_prev + scatterer_center(Vec3{}, u_prev, u_prev2, r);
    out.tilde = point_segment_distance(old, Vec3{}, -u_cur, xi_cur) < r;
    return out;
}

EtaBits eta_indicators(const Vec3& y_prev2, const Vec3& y_prev, const Vec3& y_cur, double r)
{
    return eta_indicators(norm(y_prev2), direction_of(y_prev2), norm(y_prev), direction_of(y_prev), norm(y_cur),
                          direction_of(y_cur), r);
}

EtaBits eta_prime_indicators(double xi_prev, const UnitVec3& u_prev2, const UnitVec3& u_prev, const UnitVec3& u_cur,
                             double r)
{
    const double limit = 2.0 * r / xi_prev;
    return {angle(-u_prev, u_prev2) < limit, angle(-u_prev, u_cur) < limit};
}

namespace {

struct TwoBallOutcome {
    bool deflected = false;
};

/// Bounces from p with velocity v between balls a (just left) and b for `budget` time.
TwoBallOutcome two_ball_flight(PiecewisePath& path, Vec3 p, UnitVec3 v, const Vec3& a, const Vec3& b, double r,
                               double budget, ZDiagnostics& diag)
{
    TwoBallOutcome out;
    bool at_a = true;
    std::uint64_t count = 0;
    while (budget > 0.0) {
        std::optional<SphereHit> hit;
        try {
            hit = first_sphere_hit(p, v, at_a ? b : a, r, budget);
        } catch (const DegenerateGeometry&) {
            ++diag.degenerate;
            hit.reset();
        }
        if (!hit) {
            path.extend(v, budget);
            break;
        }
        if (++count > kSubCollisionBudget) {
            throw BudgetExhausted("two-ball sub-simulation exceeded the collision budget");
        }
        path.extend(v, hit->t);
        p += hit->t * v.vec();
        budget -= hit->t;
        v = reflect(v, hit->normal);
        at_a = !at_a;
        out.deflected = true;
        ++diag.sub_collisions;
    }
    return out;
}

}  // namespace

ZResult build_Z_flights(const UnitVec3& u_in, std::span<const Flight> flights, double r, double t_max,
                        const ZOptions& opts)
{
    if (!(r > 0.0 && r < 0.5)) {
        throw std::invalid_argument("build_Z requires 0 < r < 0.5");
    }
    ZResult res;
    res.path.incoming = u_in;
    res.nodes.push_back(Vec3{});
    res.eta.reserve(flights.size());
    auto u = [&](std::size_t j) -> const UnitVec3& { return j == 0 ? u_in : flights[j - 1].u; };
    auto xi = [&](std::size_t j) { return j == 0 ? 0.0 : flights[j - 1].xi; };

    double tau = 0.0;
    bool prev_eta = false;
    for (std::size_t j = 1; j <= flights.size(); ++j) {
        EtaRecord rec;
        rec.j = static_cast<int>(j);
        const bool gated_off = j == 1 || (opts.history == EtaHistory::leg && j <= 2);
        if (!gated_off && xi(j - 1) < 1.0) {
            const EtaBits e = eta_indicators(xi(j - 2), u(j - 2), xi(j - 1), u(j - 1), xi(j), u(j), r);
            const EtaBits ep = eta_prime_indicators(xi(j - 1), u(j - 2), u(j - 1), u(j), r);
            rec.eta_hat = e.hat;
            rec.eta_tilde = e.tilde;
            rec.eta_hat_prime = ep.hat;
            rec.eta_tilde_prime = ep.tilde;
        }
        rec.eta = rec.eta_hat || rec.eta_tilde;
        if (rec.eta && prev_eta) {
            ++res.diag.neighbouring_eta;
        }
        prev_eta = rec.eta;
        res.eta.push_back(rec);

        const double budget = std::min(xi(j), t_max - tau);
        if (!(budget > 0.0)) {
            break;
        }
        const bool apply_rules = !opts.rules_only_at || *opts.rules_only_at == j;
        const Vec3 start = res.path.end();
        if (apply_rules && rec.eta_hat) {
            res.path.extend(u(j - 1), budget);
        } else if (apply_rules && j >= 2 && !gated_off && xi(j - 1) < 1.0) {
            // two-ball geometry: the scatterer that turned u_{j-1} into u_j and
            // the one met at tau_{j-2}
            const Vec3 ball_a = scatterer_center(res.nodes[j - 1], u(j - 1), u(j), r);
            const Vec3 ball_b = scatterer_center(res.nodes[j - 2], u(j - 2), u(j - 1), r);
            if (rec.eta_tilde) {
                const auto out = two_ball_flight(res.path, start, u(j), ball_a, ball_b, r, budget, res.diag);
                if (!out.deflected) {
                    ++res.diag.convention_discrepancies;
                }
            } else {
                std::optional<SphereHit> hit;
                try {
                    hit = first_sphere_hit(start, u(j), ball_b, r, budget);
                } catch (const DegenerateGeometry&) {
                    ++res.diag.degenerate;
                }
                if (hit) {
                    ++res.diag.convention_discrepancies;
                }
                res.path.extend(u(j), budget);
            }
        } else {
            res.path.extend(u(j), budget);
        }
        tau += xi(j);
        res.nodes.push_back(res.path.end());
        if (tau >= t_max) {
            break;
        }
    }
    if (opts.u_after && res.nodes.size() == flights.size() + 1) {
        res.path.outgoing = opts.u_after;
    }
    return res;
}

ZResult build_Z(const FlightStream& fs, double r, double t_max)
{
    return build_Z_flights(fs.u0, fs.flights, r, t_max);
}

PiecewisePath build_Z_k(const FlightStream& fs, std::size_t k, double r)
{
    if (k < 1 || k > fs.size()) {
        throw std::out_of_range("build_Z_k: flight index out of range");
    }
    ZOptions opts;
    opts.rules_only_at = k;
    return build_Z_flights(fs.u0, fs.flights, r, fs.duration(), opts).path;
}

double Pack::theta() const
{
    double t = 0.0;
    for (const auto& f : flights) {
        t += f.xi;
    }
    return t;
}

bool Pack::operator==(const Pack& o) const
{
    if (gamma != o.gamma || flights.size() != o.flights.size()) {
        return false;
    }
    for (std::size_t i = 0; i < flights.size(); ++i) {
        if (flights[i].xi != o.flights[i].xi || !(flights[i].u == o.flights[i].u)) {
            return false;
        }
    }
    return true;
}

namespace {

bool stops_at(const FlightStream& fs, std::size_t j)
{
    return fs.flight(j - 1).xi > 1.0 && fs.flight(j).xi > 1.0 && fs.flight(j + 1).xi > 1.0
           && fs.flight(j + 2).xi > 1.0;
}

Pack make_pack(const FlightStream& fs, std::size_t start, std::size_t stop)
{
    Pack p;
    p.gamma = static_cast<int>(stop - start);
    p.flights.assign(fs.flights.begin() + static_cast<std::ptrdiff_t>(start),
                     fs.flights.begin() + static_cast<std::ptrdiff_t>(stop));
    return p;
}

}  // namespace

std::vector<Pack> cut_packs(const FlightStream& fs)
{
    if (fs.size() < 2 || !(fs.flight(1).xi > 1.0 && fs.flight(2).xi > 1.0)) {
        throw std::invalid_argument("cut_packs requires xi_1 > 1 and xi_2 > 1");
    }
    std::vector<Pack> packs;
    std::size_t start = 0;
    while (true) {
        std::size_t j = start + 2;
        while (j + 2 <= fs.size() && !stops_at(fs, j)) {
            ++j;
        }
        if (j + 2 > fs.size()) {
            break;
        }
        packs.push_back(make_pack(fs, start, j));
        start = j;
    }
    return packs;
}

PackSource::PackSource(RngStream& rng) : rng_(rng)
{
    fs_ = generate_flight_stream(rng_, 0.0, 2);
}

Pack PackSource::next()
{
    std::size_t j = start_ + 2;
    while (true) {
        extend_flight_stream(fs_, rng_, j + 2);
        if (stops_at(fs_, j)) {
            break;
        }
        ++j;
    }
    Pack p = make_pack(fs_, start_, j);
    start_ = j;
    return p;
}

bool pack_invariants_hold(const Pack& p, double next_xi1, double next_xi2)
{
    const int g = p.gamma;
    if (g < 2 || g == 3 || g == 4 || static_cast<int>(p.flights.size()) != g) {
        return false;
    }
    auto xi = [&](int j) {
        if (j <= g) {
            return p.flights[static_cast<std::size_t>(j - 1)].xi;
        }
        return j == g + 1 ? next_xi1 : next_xi2;
    };
    if (!(xi(1) > 1.0 && xi(2) > 1.0 && xi(g - 1) > 1.0 && xi(g) > 1.0)) {
        return false;
    }
    for (int j = 2; j < g; ++j) {
        if (std::min({xi(j - 1), xi(j), xi(j + 1), xi(j + 2)}) > 1.0) {
            return false;
        }
    }
    return std::min({xi(g - 1), xi(g), xi(g + 1), xi(g + 2)}) > 1.0;
}

Pack reverse_pack(const Pack& p)
{
    Pack out;
    out.gamma = p.gamma;
    out.flights.reserve(p.flights.size());
    for (std::size_t i = p.flights.size(); i-- > 0;) {
        out.flights.push_back(Flight{p.flights[i].xi, -p.flights[i].u, p.flights[i].eps});
    }
    return out;
}

ZResult build_leg_Z_result(const Pack& p, double r, const std::optional<UnitVec3>& u_in,
                           const std::optional<UnitVec3>& u_out)
{
    ZOptions opts;
    opts.history = EtaHistory::leg;
    opts.u_after = u_out;
    const UnitVec3 in = u_in ? *u_in : p.flights.front().u;
    ZResult res = build_Z_flights(in, p.flights, r, p.theta(), opts);
    if (!u_in) {
        res.path.incoming.reset();
    }
    return res;
}

PiecewisePath build_leg_Z(const Pack& p, double r)
{
    return build_leg_Z_result(p, r).path;
}

PiecewisePath build_leg_Z_star(const Pack& p, double r)
{
    const PiecewisePath forward = build_leg_Z(reverse_pack(p), r);
    PiecewisePath rev = forward.reversed();
    return rev.shifted(-forward.end());
}

LegTriple build_leg_X(const Pack& p, const UnitVec3& u_in, const UnitVec3& u_out, double r)
{
    LegTriple leg;
    leg.theta = p.theta();
    leg.u_in = u_in;
    leg.u_out = u_out;

    leg.Y.incoming = u_in;
    for (const auto& f : p.flights) {
        leg.Y.extend(f.u, f.xi);
    }
    leg.Y.outgoing = u_out;

    ZResult z = build_leg_Z_result(p, r, u_in, u_out);
    leg.Z = std::move(z.path);
    leg.eta = std::move(z.eta);
    leg.zdiag = z.diag;

    ExploreOptions eo;
    eo.u_after = u_out;
    ExplorationResult x = explore_flights(u_in, p.flights, r, leg.theta, eo);
    leg.X = std::move(x.path);
    leg.x_out = x.outgoing;
    leg.X.outgoing = x.outgoing;

    leg.first_mismatch = first_divergence(leg.X, leg.Z, kMatchTol);
    leg.mismatch = leg.first_mismatch.has_value() || !(leg.x_out == u_out);
    return leg;
}

MultiLeg concatenate_legs(const FlightStream& fs, const std::vector<Pack>& packs, double r)
{
    MultiLeg ml;
    ml.packs = packs;
    ml.Y.incoming = fs.u0;
    ml.Z.incoming = fs.u0;
    ml.X.incoming = fs.u0;
    UnitVec3 z_in = fs.u0;
    UnitVec3 x_in = fs.u0;
    UnitVec3 x_out = fs.u0;
    std::size_t gamma_end = 0;
    for (std::size_t n = 0; n < packs.size(); ++n) {
        const Pack& p = packs[n];
        gamma_end += static_cast<std::size_t>(p.gamma);
        const UnitVec3 u_out = fs.u(gamma_end + 1);
        for (const auto& f : p.flights) {
            ml.Y.extend(f.u, f.xi);
        }
        ZResult z = build_leg_Z_result(p, r, z_in, u_out);
        append_path(ml.Z, z.path);
        ExploreOptions eo;
        eo.u_after = u_out;
        ExplorationResult x = explore_flights(x_in, p.flights, r, p.theta(), eo);
        append_path(ml.X, x.path);
        const bool mismatch = first_divergence(x.path, z.path, kMatchTol).has_value() || !(x.outgoing == u_out);
        ml.leg_mismatch.push_back(mismatch);
        // The next leg starts at 0^- with the velocity held just before the
        // junction, so it places the junction scatterer itself.
        x_in = x.path.velocities().back();
        x_out = x.outgoing;
        z_in = p.flights.back().u;
        ml.leg_end.push_back(ml.Z.end_time());
        ml.gamma_end.push_back(gamma_end);
    }
    ml.Y.outgoing = fs.u(gamma_end + 1);
    ml.Z.outgoing = fs.u(gamma_end + 1);
    ml.X.outgoing = x_out;
    return ml;
}

std::vector<InterlegEvents> interleg_events(const PiecewisePath& path, const std::vector<double>& leg_end, double r)
{
    std::vector<InterlegEvents> out(leg_end.size());
    if (leg_end.empty()) {
        return out;
    }
    const auto scat = path_scatterers(path, r);
    const auto& ts = path.times();
    const auto& pts = path.points();
    const auto& vel = path.velocities();
    const double thr = r * (1.0 - kGeomRelTol);
    auto eps = [](double t) { return 1e-9 * (1.0 + t); };

    SpatialGrid seg_grid(std::max(1.0, 4.0 * r));
    SpatialGrid ball_grid(std::max(1.0, 4.0 * r));
    struct Seg {
        Vec3 a;
        UnitVec3 v;
        double len;
    };
    std::vector<Seg> segs;
    std::vector<Vec3> balls;

    std::size_t si = 0;  // next scatterer to assign
    std::size_t gi = 0;  // next path segment
    double lo = 0.0;
    std::vector<Vec3> junction;  // scatterers at the previous leg end, not yet "past"
    while (si < scat.size() && scat[si].t <= eps(0.0)) {
        balls.push_back(scat[si].center);
        ball_grid.insert_ball(static_cast<int>(balls.size() - 1), scat[si].center, r);
        ++si;
    }
    for (std::size_t j = 0; j < leg_end.size(); ++j) {
        const double hi = leg_end[j];
        std::vector<Vec3> leg_balls;
        while (si < scat.size() && scat[si].t <= hi + eps(hi)) {
            leg_balls.push_back(scat[si].center);
            ++si;
        }
        std::vector<Seg> leg_segs;
        while (gi < vel.size() && ts[gi] < hi - eps(hi)) {
            const double a = std::max(ts[gi], lo);
            const double b = std::min(ts[gi + 1], hi);
            if (b > a) {
                leg_segs.push_back({pts[gi] + (a - ts[gi]) * vel[gi].vec(), vel[gi], b - a});
            }
            if (ts[gi + 1] <= hi + eps(hi)) {
                ++gi;
            } else {
                break;
            }
        }
        // shadowing of this leg's scatterers by the past path
        for (const Vec3& c : leg_balls) {
            seg_grid.visit_ball(c, r, [&](int id) {
                const Seg& s = segs[static_cast<std::size_t>(id)];
                if (point_segment_distance(c, s.a, s.v, s.len) < thr) {
                    out[j].w_hat = true;
                }
            });
        }
        // this leg's path against earlier scatterers
        for (const Seg& s : leg_segs) {
            ball_grid.visit_segment(s.a, s.a + s.len * s.v.vec(), [&](int id) {
                if (point_segment_distance(balls[static_cast<std::size_t>(id)], s.a, s.v, s.len) < thr) {
                    out[j].w_tilde = true;
                }
            });
        }
        for (const Seg& s : leg_segs) {
            segs.push_back(s);
            seg_grid.insert_segment(static_cast<int>(segs.size() - 1), s.a, s.a + s.len * s.v.vec());
        }
        for (const Vec3& c : junction) {
            balls.push_back(c);
            ball_grid.insert_ball(static_cast<int>(balls.size() - 1), c, r);
        }
        junction.clear();
        // the scatterer sitting exactly at this leg's end joins the past one leg later
        for (std::size_t k = 0; k < leg_balls.size(); ++k) {
            const bool at_end = k + 1 == leg_balls.size() && std::abs(scat[si - 1].t - hi) <= eps(hi);
            if (at_end) {
                junction.push_back(leg_balls[k]);
            } else {
                balls.push_back(leg_balls[k]);
                ball_grid.insert_ball(static_cast<int>(balls.size() - 1), leg_balls[k], r);
            }
        }
        lo = hi;
    }
    return out;
}

}  // namespace lorentz
