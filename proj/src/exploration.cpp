#include "lorentz/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lorentz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Segment {
    Vec3 a;
    UnitVec3 v;
    double len;
};

/// Past path segments indexed by a grid, for the Step 3 distance query.
class SegmentIndex {
public:
    explicit SegmentIndex(double r) : r_(r), grid_(std::max(1.0, 4.0 * r)) {}

    void add(const Vec3& a, const UnitVec3& v, double len)
    {
        segs_.push_back({a, v, len});
        grid_.insert_segment(static_cast<int>(segs_.size() - 1), a, a + len * v.vec());
    }

    /// min(r, distance from q to the indexed segments)
    double distance_capped(const Vec3& q) const
    {
        double best = r_;
        grid_.visit_ball(q, r_, [&](int id) {
            const Segment& s = segs_[static_cast<std::size_t>(id)];
            best = std::min(best, point_segment_distance(q, s.a, s.v, s.len));
        });
        return best;
    }

private:
    double r_;
    SpatialGrid grid_;
    std::vector<Segment> segs_;
};

}  // namespace

int ScattererSet::add(const Vec3& center, int birth_index, double birth_time)
{
    const int id = static_cast<int>(items_.size());
    items_.push_back({center, birth_index, birth_time});
    grid_.insert_ball(id, center, r_);
    ++real_;
    return id;
}

int ScattererSet::add_star(int birth_index, double birth_time)
{
    items_.push_back({std::nullopt, birth_index, birth_time});
    return static_cast<int>(items_.size() - 1);
}

void ScattererSet::clear()
{
    items_.clear();
    grid_.clear();
    real_ = 0;
}

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::recollision:
        return "recollision";
    case EventKind::shadowed_scattering:
        return "shadowed";
    case EventKind::fresh_scattering:
        return "fresh";
    }
    return "?";
}

std::size_t EventLog::count(EventKind kind) const
{
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const Event& e) { return e.kind == kind; }));
}

void EventLog::merge(const EventLog& other)
{
    records.insert(records.end(), other.records.begin(), other.records.end());
    std::stable_sort(records.begin(), records.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
}

Vec3 candidate_center(const Vec3& xn, const UnitVec3& v_in, const UnitVec3& u_out, double r)
{
    return scatterer_center(xn, v_in, u_out, r);
}

ShadowReport shadow_test(const PiecewisePath& past, const Vec3& candidate, double r)
{
    const double d = std::min(r, path_point_distance(past, candidate, past.start_time(), past.end_time()));
    return {d < r * (1.0 - kGeomRelTol), d};
}

ExplorationResult explore_flights(const UnitVec3& u_in, std::span<const Flight> flights, double r, double t_max,
                                  const ExploreOptions& opts)
{
    ExplorationResult res;
    res.scatterers = ScattererSet(r);
    res.path = PiecewisePath(opts.origin, opts.t0);
    res.path.incoming = u_in;
    res.outgoing = u_in;
    if (flights.empty()) {
        return res;
    }
    SegmentIndex past(r);
    ScattererSet& set = res.scatterers;

    Vec3 x = opts.origin;
    double t = 0.0;    // elapsed time within this run
    double tau = 0.0;  // tau_n, accumulated exactly as for Y
    UnitVec3 v = u_in;
    int last = -1;

    auto note_mismatch = [&](double when) {
        if (!res.first_mismatch || when < *res.first_mismatch) {
            res.first_mismatch = when;
        }
    };

    // Step 1: the scattering at time 0 is always fresh
    if (!(u_in == flights[0].u)) {
        last = set.add(candidate_center(x, u_in, flights[0].u, r), 0, opts.t0);
        res.events.records.push_back({EventKind::fresh_scattering, opts.t0, 0, last});
    }
    v = flights[0].u;

    for (std::size_t n = 1; n <= flights.size(); ++n) {
        const double xi = flights[n - 1].xi;
        const bool complete = tau + xi <= t_max;
        const double flight_end = complete ? tau + xi : t_max;
        double remaining = flight_end - t;
        std::uint64_t sub = 0;

        // Step 2: free flight with elastic collisions on remembered scatterers
        while (remaining > 0.0) {
            const Vec3 end = x + remaining * v.vec();
            double best_t = kInf;
            int best_id = -1;
            UnitVec3 best_n;
            set.grid().visit_segment(x, end, [&](int id) {
                if (id == last) {
                    return;
                }
                const auto hit = first_sphere_hit(x, v, *set.items()[static_cast<std::size_t>(id)].center, r,
                                                  remaining, &res.diagnostics);
                if (hit && (hit->t < best_t || (hit->t == best_t && id < best_id))) {
                    best_t = hit->t;
                    best_id = id;
                    best_n = hit->normal;
                }
            });
            if (best_id < 0) {
                past.add(x, v, remaining);
                res.path.extend(v, remaining);
                x = end;
                break;
            }
            if (++sub > kSubCollisionBudget) {
                throw BudgetExhausted("sub-collision budget exhausted in one flight interval");
            }
            past.add(x, v, best_t);
            res.path.extend(v, best_t);
            x += best_t * v.vec();
            t += best_t;
            remaining -= best_t;
            v = reflect(v, best_n);
            last = best_id;
            res.events.records.push_back(
                {EventKind::recollision, opts.t0 + t, static_cast<int>(n), best_id});
            note_mismatch(opts.t0 + t);
        }
        t = flight_end;
        if (!complete) {
            break;
        }
        tau = flight_end;

        // Step 3: scattering decision at tau_n
        std::optional<UnitVec3> u_next;
        if (n < flights.size()) {
            u_next = flights[n].u;
        } else if (opts.u_after) {
            u_next = opts.u_after;
        }
        if (!u_next) {
            break;
        }
        const double now = opts.t0 + tau;
        const Vec3 cand = candidate_center(x, v, *u_next, r);
        const double d = past.distance_capped(cand);
        if (d < r * (1.0 - kGeomRelTol)) {
            const int id = set.add_star(static_cast<int>(n), now);
            res.events.records.push_back({EventKind::shadowed_scattering, now, static_cast<int>(n), id});
            note_mismatch(now);
        } else {
            last = set.add(cand, static_cast<int>(n), now);
            res.events.records.push_back({EventKind::fresh_scattering, now, static_cast<int>(n), last});
            v = *u_next;
        }
    }
    res.outgoing = v;
    return res;
}

ExplorationResult explore(const FlightStream& fs, double r, double t_max)
{
    if (!(r > 0.0 && r < 0.5)) {
        throw std::invalid_argument("explore requires 0 < r < 0.5");
    }
    return explore_flights(fs.u0, fs.flights, r, t_max);
}

double min_distance_points_to_path(const PiecewisePath& path, std::span<const Vec3> points, double cutoff)
{
    SpatialGrid grid(std::max(1.0, 4.0 * cutoff));
    const auto& vel = path.velocities();
    const auto& pts = path.points();
    const auto& ts = path.times();
    for (std::size_t i = 0; i < vel.size(); ++i) {
        grid.insert_segment(static_cast<int>(i), pts[i], pts[i + 1]);
    }
    double best = cutoff;
    for (const Vec3& q : points) {
        if (vel.empty()) {
            best = std::min(best, distance(q, pts.front()));
            continue;
        }
        grid.visit_ball(q, cutoff, [&](int id) {
            const auto i = static_cast<std::size_t>(id);
            best = std::min(best, point_segment_distance(q, pts[i], vel[i], ts[i + 1] - ts[i]));
        });
    }
    return best;
}

ConsistencyReport check_r_consistent(const PiecewisePath& path, std::span<const Vec3> centers, double r)
{
    const double d = min_distance_points_to_path(path, centers, r);
    ConsistencyReport rep;
    rep.ok = d >= r * (1.0 - kGeomRelTol);
    rep.worst_violation = std::max(0.0, r - d);
    return rep;
}

ConsistencyReport check_r_consistent(const PiecewisePath& path, double r)
{
    std::vector<Vec3> centers;
    for (const auto& s : path_scatterers(path, r)) {
        centers.push_back(s.center);
    }
    return check_r_consistent(path, centers, r);
}

bool check_r_compatible(const PiecewisePath& a, const PiecewisePath& b, double r)
{
    if (a.end_time() > b.start_time() && b.end_time() > a.start_time()) {
        throw std::invalid_argument("r-compatibility needs non-overlapping time intervals");
    }
    auto centers_of = [r](const PiecewisePath& p) {
        std::vector<Vec3> c;
        for (const auto& s : path_scatterers(p, r)) {
            c.push_back(s.center);
        }
        return c;
    };
    const auto ca = centers_of(a);
    const auto cb = centers_of(b);
    const double limit = r * (1.0 - kGeomRelTol);
    return min_distance_points_to_path(b, ca, r) >= limit && min_distance_points_to_path(a, cb, r) >= limit;
}

std::uint64_t sample_poisson(RngStream& rng, double mean)
{
    std::uint64_t total = 0;
    while (mean > 0.0) {
        const double m = std::min(mean, 200.0);
        mean -= m;
        const double u = rng.uniform();
        double p = std::exp(-m);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf && k < 100000) {
            ++k;
            p *= m / static_cast<double>(k);
            cdf += p;
            if (p == 0.0 && static_cast<double>(k) > m) {
                break;
            }
        }
        total += k;
    }
    return total;
}

PoissonField::PoissonField(double r, double rho, std::uint64_t seed)
    : r_(r), rho_(rho), base_seed_(seed), seed_(seed)
{
    while (origin_covered()) {
        ++rejections_;
        seed_ = splitmix64(base_seed_ ^ (0x5851f42d4c957f2dULL * static_cast<std::uint64_t>(rejections_)));
        cells_.clear();
    }
}

double PoissonField::unit_mean_free_path_density(double r)
{
    return 1.0 / (std::numbers::pi * r * r);
}

const std::vector<Vec3>& PoissonField::cell(std::int64_t i, std::int64_t j, std::int64_t k)
{
    constexpr std::uint64_t mask = (1ULL << 21) - 1;
    const std::uint64_t key = ((static_cast<std::uint64_t>(i) & mask) << 42)
                              | ((static_cast<std::uint64_t>(j) & mask) << 21) | (static_cast<std::uint64_t>(k) & mask);
    auto it = cells_.find(key);
    if (it != cells_.end()) {
        return it->second;
    }
    RngStream rng(seed_, splitmix64(key));
    const std::uint64_t count = sample_poisson(rng, rho_);
    std::vector<Vec3> pts;
    pts.reserve(count);
    for (std::uint64_t n = 0; n < count; ++n) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        const double c = rng.uniform();
        pts.push_back({static_cast<double>(i) + a, static_cast<double>(j) + b, static_cast<double>(k) + c});
    }
    return cells_.emplace(key, std::move(pts)).first->second;
}

void PoissonField::collect(const Vec3& lo, const Vec3& hi, std::vector<Vec3>& out)
{
    for (auto i = static_cast<std::int64_t>(std::floor(lo.x)); i <= static_cast<std::int64_t>(std::floor(hi.x)); ++i) {
        for (auto j = static_cast<std::int64_t>(std::floor(lo.y)); j <= static_cast<std::int64_t>(std::floor(hi.y));
             ++j) {
            for (auto k = static_cast<std::int64_t>(std::floor(lo.z));
                 k <= static_cast<std::int64_t>(std::floor(hi.z)); ++k) {
                const auto& c = cell(i, j, k);
                out.insert(out.end(), c.begin(), c.end());
            }
        }
    }
}

bool PoissonField::origin_covered()
{
    std::vector<Vec3> near;
    collect({-r_, -r_, -r_}, {r_, r_, r_}, near);
    return std::any_of(near.begin(), near.end(), [&](const Vec3& c) { return norm(c) < r_; });
}

namespace {

template <class FindHit>
DirectRun billiard(const UnitVec3& u0, double t_max, FindHit&& find_hit)
{
    DirectRun run;
    Vec3 x;
    UnitVec3 v = u0;
    double t = 0.0;
    std::optional<Vec3> last;
    std::uint64_t collisions = 0;
    while (t < t_max) {
        const double remaining = t_max - t;
        double step = remaining;
        std::optional<SphereHit> hit;
        Vec3 hit_center;
        find_hit(x, v, remaining, last, step, hit, hit_center);
        if (!hit) {
            run.path.extend(v, step);
            x += step * v.vec();
            t += step;
            continue;
        }
        if (++collisions > kSubCollisionBudget) {
            throw BudgetExhausted("trapped trajectory: collision guard reached");
        }
        run.path.extend(v, hit->t);
        x += hit->t * v.vec();
        t += hit->t;
        v = reflect(v, hit->normal);
        last = hit_center;
        run.collision_times.push_back(t);
    }
    return run;
}

}  // namespace

DirectRun direct_field_simulate(std::span<const Vec3> field, double r, const UnitVec3& u0, double t_max)
{
    for (const Vec3& c : field) {
        if (norm(c) < r) {
            throw std::invalid_argument("origin is covered by a scatterer");
        }
    }
    SpatialGrid grid(std::max(1.0, 4.0 * r));
    for (std::size_t i = 0; i < field.size(); ++i) {
        grid.insert_ball(static_cast<int>(i), field[i], r);
    }
    return billiard(u0, t_max,
                    [&](const Vec3& x, const UnitVec3& v, double remaining, const std::optional<Vec3>& last,
                        double& step, std::optional<SphereHit>& hit, Vec3& hit_center) {
                        step = remaining;
                        grid.visit_segment(x, x + remaining * v.vec(), [&](int id) {
                            const Vec3& c = field[static_cast<std::size_t>(id)];
                            if (last && c == *last) {
                                return;
                            }
                            auto h = first_sphere_hit(x, v, c, r, remaining);
                            if (h && (!hit || h->t < hit->t)) {
                                hit = h;
                                hit_center = c;
                            }
                        });
                    });
}

DirectRun direct_field_simulate(PoissonField& field, const UnitVec3& u0, double t_max)
{
    const double r = field.radius();
    constexpr double kChunk = 0.5;
    std::vector<Vec3> near;
    return billiard(u0, t_max,
                    [&](const Vec3& x, const UnitVec3& v, double remaining, const std::optional<Vec3>& last,
                        double& step, std::optional<SphereHit>& hit, Vec3& hit_center) {
                        step = std::min(remaining, kChunk);
                        const Vec3 end = x + step * v.vec();
                        const Vec3 lo{std::min(x.x, end.x) - r, std::min(x.y, end.y) - r, std::min(x.z, end.z) - r};
                        const Vec3 hi{std::max(x.x, end.x) + r, std::max(x.y, end.y) + r, std::max(x.z, end.z) + r};
                        near.clear();
                        field.collect(lo, hi, near);
                        for (const Vec3& c : near) {
                            if (last && c == *last) {
                                continue;
                            }
                            auto h = first_sphere_hit(x, v, c, r, step);
                            if (h && (!hit || h->t < hit->t)) {
                                hit = h;
                                hit_center = c;
                            }
                        }
                    });
}

}  // namespace lorentz
