#include <doctest.h>

#include <cmath>
#include <vector>

#include "lorentz/exploration.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/lab.hpp"
#include "lorentz/parallel.hpp"
#include "lorentz/stats.hpp"

using namespace lorentz;

namespace {

PiecewisePath straight(const UnitVec3& v, double len)
{
    PiecewisePath p;
    p.extend(v, len);
    return p;
}

/// Brute-force distance from q to a path, sampled every `dt` in time.
double grid_distance(const PiecewisePath& path, const Vec3& q, double dt)
{
    double best = distance(q, path.start());
    for (double t = path.start_time(); t <= path.end_time(); t += dt) {
        best = std::min(best, distance(q, path.position(t)));
    }
    return std::min(best, distance(q, path.end()));
}

}  // namespace

TEST_CASE("exploration equals Y before the first mismatch")
{
    constexpr double r = 0.01;
    int clean = 0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        RngStream rng(21, k);
        const FlightStream fs = generate_flight_stream(rng, 20.0);
        const ExplorationResult x = explore(fs, r, 20.0);
        const PiecewisePath y = build_Y(fs);
        const auto div = first_divergence(x.path, y, 1e-9);
        if (!x.first_mismatch) {
            ++clean;
            CHECK_FALSE(div.has_value());
            CHECK(x.scatterers.real_count() == x.events.count(EventKind::fresh_scattering));
        } else if (div) {
            CHECK(*div >= *x.first_mismatch);
        }
        CHECK(check_r_consistent(x.path, r).ok);
    }
    CHECK(clean > 100);
}

TEST_CASE("mismatch before T grows linearly in r")
{
    const std::vector<double> rs{0.02, 0.01, 0.005};
    std::vector<EstimateCI> est;
    EventParams params;
    params.T = 10.0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        est.push_back(estimate_event_probability(EstimatorKind::first_mismatch_before_T, rs[i], 20'000, 22 + i, params).ci);
    }
    const LineFit f = loglog_probability_slope(rs, est);
    CHECK(f.slope == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("fresh scatterings leave uniformly")
{
    constexpr double r = 0.02;
    std::vector<double> cosines;
    for (std::uint64_t k = 0; cosines.size() < 100'000; ++k) {
        RngStream rng(23, k);
        const FlightStream fs = generate_flight_stream(rng, 30.0);
        const ExplorationResult x = explore(fs, r, 30.0);
        for (const Event& e : x.events.records) {
            if (e.kind == EventKind::fresh_scattering && e.t > 0.0) {
                cosines.push_back(x.path.velocity(e.t + 1e-9).z());
            }
        }
    }
    CHECK(ks_one_sample(cosines, [](double c) { return (c + 1.0) / 2.0; }).p_value > 0.01);
}

TEST_CASE("shadow_test")
{
    constexpr double r = 0.1;
    const PiecewisePath past = straight(kE1, 2.0);
    const ShadowReport ahead = shadow_test(past, {2.5, 0, 0}, r);
    CHECK_FALSE(ahead.shadowed);
    CHECK(ahead.d == doctest::Approx(r));
    CHECK(shadow_test(past, {1.0, 0.05, 0}, r).shadowed);
}

TEST_CASE("shadow distance against a time grid")
{
    constexpr double r = 0.1;
    RngStream rng(24, 0);
    for (int k = 0; k < 10'000; ++k) {
        PiecewisePath path;
        const int segs = 1 + static_cast<int>(4.0 * rng.uniform());
        for (int i = 0; i < segs; ++i) {
            path.extend(sample_direction(rng), 0.5 * rng.uniform() + 0.01);
        }
        const Vec3 q{rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5};
        const double d = shadow_test(path, q, r).d;
        const double g = std::min(r, grid_distance(path, q, r / 100.0));
        CHECK(std::abs(d - g) <= r / 50.0);
    }
}

TEST_CASE("r-consistency")
{
    constexpr double r = 0.1;
    CHECK(check_r_consistent(straight(kE1, 3.0), r).ok);

    // head-on reversal, then a turn back through the first scatterer
    FlightStream fs;
    fs.u0 = kE2;
    fs.flights = {Flight::make(1.0, kE1), Flight::make(2.0, -kE1), Flight::make(3.0, kE1), Flight::make(1.0, kE2)};
    const PiecewisePath y = build_Y(fs);
    CHECK_FALSE(check_r_consistent(y, r).ok);
    const ExplorationResult x = explore(fs, r, fs.duration());
    CHECK(check_r_consistent(x.path, r).ok);
    CHECK(x.first_mismatch.has_value());
}

TEST_CASE("r-compatibility")
{
    constexpr double r = 0.1;
    const PiecewisePath a = straight(kE1, 1.0);
    const PiecewisePath b = straight(kE2, 1.0).shifted({0, 0, 5.0}, 1.0);
    CHECK(check_r_compatible(a, b, r));

    // each leg consistent and pairwise compatible: the concatenation is consistent
    RngStream rng(25, 0);
    int checked = 0;
    for (int k = 0; k < 500; ++k) {
        PiecewisePath p;
        p.extend(sample_direction(rng), 1.0 + rng.uniform());
        p.extend(sample_direction(rng), 1.0 + rng.uniform());
        PiecewisePath q(p.end(), p.end_time());
        q.extend(sample_direction(rng), 1.0 + rng.uniform());
        q.extend(sample_direction(rng), 1.0 + rng.uniform());
        p.outgoing = q.velocities().front();
        q.incoming = p.velocities().back();
        PiecewisePath joined = p;
        joined.outgoing.reset();
        for (std::size_t i = 0; i < q.segment_count(); ++i) {
            joined.extend(q.velocities()[i], q.times()[i + 1] - q.times()[i]);
        }
        if (check_r_consistent(p, r).ok && check_r_consistent(q, r).ok && check_r_compatible(p, q, r)) {
            ++checked;
            CHECK(check_r_consistent(joined, r).ok);
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("direct billiard")
{
    constexpr double r = 0.1;
    const std::vector<Vec3> empty;
    const DirectRun free = direct_field_simulate(empty, r, kE1, 5.0);
    CHECK(free.collision_times.empty());
    CHECK(norm(free.path.end() - Vec3{5, 0, 0}) < 1e-12);

    const std::vector<Vec3> one{{2.0, 0, 0}};
    const DirectRun back = direct_field_simulate(one, r, kE1, 5.0);
    REQUIRE(back.collision_times.size() == 1);
    CHECK(back.collision_times[0] == doctest::Approx(2.0 - r));
    CHECK(norm(back.path.end() - Vec3{(2.0 - r) - (5.0 - (2.0 - r)), 0, 0}) < 1e-12);
}

TEST_CASE("first collision in a Poisson field is Exp(1)")
{
    constexpr double r = 0.05;
    const double rho = PoissonField::unit_mean_free_path_density(r);
    CHECK(rho == doctest::Approx(1.0 / (M_PI * r * r)));
    std::vector<double> first;
    for (std::uint64_t k = 0; k < 2000; ++k) {
        PoissonField field(r, rho, derive_seed(26, k));
        RngStream dir(27, k);
        const DirectRun run = direct_field_simulate(field, sample_direction(dir), 40.0);
        REQUIRE_FALSE(run.collision_times.empty());
        first.push_back(run.collision_times.front());
    }
    CHECK(ks_one_sample(first, [](double x) { return 1.0 - std::exp(-x); }).p_value > 0.01);
}
