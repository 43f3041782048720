#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lorentz/exploration.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/stats.hpp"
#include "lorentz/zprocess.hpp"

using namespace lorentz;

namespace {

UnitVec3 unit(double x, double y, double z)
{
    return UnitVec3::normalized({x, y, z});
}

FlightStream stream_of(const std::vector<double>& xi, std::uint64_t seed)
{
    RngStream rng(seed, 0);
    FlightStream fs;
    fs.u0 = sample_direction(rng);
    for (double x : xi) {
        fs.flights.push_back(Flight::make(x, sample_direction(rng)));
    }
    return fs;
}

}  // namespace

TEST_CASE("eta indicators")
{
    constexpr double r = 0.01;
    const EtaBits gated = eta_indicators(1.0, kE2, 1.5, kE1, 2.0, -kE1, r);
    CHECK_FALSE(gated.hat);
    CHECK_FALSE(gated.tilde);

    const EtaBits back = eta_indicators(1.0, kE2, 0.5, kE1, 2.0, -kE1, r);
    CHECK(back.tilde);
    const EtaBits too_short = eta_indicators(1.0, kE2, 0.5, kE1, 0.1, -kE1, r);
    CHECK_FALSE(too_short.tilde);

    // increments form agrees with flight form
    const EtaBits inc = eta_indicators(Vec3{0, 1, 0}, Vec3{0.5, 0, 0}, Vec3{-2, 0, 0}, r);
    CHECK(inc.tilde == back.tilde);
    CHECK(inc.hat == back.hat);
}

TEST_CASE("angle-only indicators")
{
    constexpr double r = 0.01;
    for (double xi : {0.001, 0.01, 0.5}) {
        CHECK(eta_prime_indicators(xi, kE2, kE1, -kE1, r).tilde);
    }
    CHECK_FALSE(eta_prime_indicators(1.0, kE3, kE1, kE2, r).tilde);
}

TEST_CASE("exact indicators imply the angle-only ones")
{
    RngStream rng(31, 0);
    for (double r : {0.05, 0.01}) {
        int fired = 0;
        for (int k = 0; k < 200'000; ++k) {
            const double x2 = sample_flight_time(rng);
            const UnitVec3 u2 = sample_direction(rng);
            const double x1 = sample_flight_time(rng, FlightCondition::short_flight);
            const UnitVec3 u1 = sample_direction(rng);
            const double x0 = sample_flight_time(rng);
            const UnitVec3 u0 = sample_direction(rng);
            const EtaBits e = eta_indicators(x2, u2, x1, u1, x0, u0, r);
            const EtaBits p = eta_prime_indicators(x1, u2, u1, u0, r);
            fired += (e.hat || e.tilde) ? 1 : 0;
            CHECK((!e.hat || p.hat));
            CHECK((!e.tilde || p.tilde));
        }
        CHECK(fired > 0);
    }
}

TEST_CASE("angle-only indicator frequency is linear in r")
{
    std::vector<double> c;
    for (double r : {0.02, 0.01, 0.005}) {
        RngStream rng(32, 0);
        std::uint64_t hits = 0;
        constexpr int n = 1'000'000;
        for (int k = 0; k < n; ++k) {
            const UnitVec3 u2 = sample_direction(rng);
            const double xi = sample_flight_time(rng, FlightCondition::short_flight);
            const UnitVec3 u1 = sample_direction(rng);
            const UnitVec3 u0 = sample_direction(rng);
            hits += eta_prime_indicators(xi, u2, u1, u0, r).tilde ? 1 : 0;
        }
        c.push_back(static_cast<double>(hits) / n / r);
    }
    CHECK(c[1] == doctest::Approx(c[0]).epsilon(0.1));
    CHECK(c[2] == doctest::Approx(c[0]).epsilon(0.1));
}

TEST_CASE("Z equals Y when every flight is long")
{
    RngStream rng(33, 0);
    FlightStream fs;
    fs.u0 = sample_direction(rng);
    for (int i = 0; i < 50; ++i) {
        fs.flights.push_back(sample_flight(rng, FlightCondition::long_flight));
    }
    const ZResult z = build_Z(fs, 0.05, fs.duration());
    CHECK(max_deviation(z.path, build_Y(fs)) < 1e-12);
    for (const auto& e : z.eta) {
        CHECK_FALSE(e.eta);
    }
}

TEST_CASE("pack cutting")
{
    const FlightStream a = stream_of({1.2, 1.3, 0.5, 2.0, 1.1, 1.5, 1.4, 1.6}, 34);
    const auto pa = cut_packs(a);
    REQUIRE_FALSE(pa.empty());
    CHECK(pa.front().gamma == 5);

    const FlightStream b = stream_of({1.2, 1.3, 1.4, 1.5}, 35);
    const auto pb = cut_packs(b);
    REQUIRE_FALSE(pb.empty());
    CHECK(pb.front().gamma == 2);

    CHECK_THROWS_AS(cut_packs(stream_of({0.5, 1.3, 1.4, 1.5}, 36)), std::invalid_argument);
}

TEST_CASE("packs from a source satisfy the pack invariants")
{
    RngStream rng(37, 0);
    PackSource src(rng);
    for (int i = 0; i < 2000; ++i) {
        const Pack p = src.next();
        const std::size_t n = src.consumed() + 1;
        CHECK(pack_invariants_hold(p, src.stream().flight(n).xi, src.stream().flight(n + 1).xi));
    }
}

TEST_CASE("pack reversal")
{
    Pack p;
    p.gamma = 2;
    p.flights = {Flight::make(1.5, kE1), Flight::make(2.0, kE2)};
    const Pack q = reverse_pack(p);
    REQUIRE(q.flights.size() == 2);
    CHECK(q.flights[0].xi == 2.0);
    CHECK(q.flights[1].xi == 1.5);
    CHECK(q.flights[0].u == -kE2);
    CHECK(q.flights[1].u == -kE1);

    RngStream rng(38, 0);
    PackSource src(rng);
    std::vector<double> first_rev;
    std::vector<double> last_fwd;
    for (int i = 0; i < 10'000; ++i) {
        const Pack f = src.next();
        CHECK(reverse_pack(reverse_pack(f)) == f);
        first_rev.push_back(reverse_pack(f).flights.front().xi);
        // the last flight of the next independent pack keeps the samples apart
        last_fwd.push_back(src.next().flights.back().xi);
    }
    CHECK(ks_two_sample(first_rev, last_fwd).p_value > 0.01);
}

TEST_CASE("forward and backward legs")
{
    const double r = 0.05;
    Pack straight;
    straight.gamma = 2;
    straight.flights = {Flight::make(1.5, kE1), Flight::make(2.0, kE2)};
    const PiecewisePath z = build_leg_Z(straight, r);
    CHECK(norm(z.end() - Vec3{1.5, 2.0, 0}) < 1e-12);
    const PiecewisePath zs = build_leg_Z_star(straight, r);
    // the backward leg of a straight pack retraces the forward one from the far end
    CHECK(norm(zs.end() - z.end()) < 1e-12);
    CHECK(norm(zs.position(2.0) - Vec3{1.5, 0.5, 0}) < 1e-12);

    RngStream rng(39, 0);
    PackSource src(rng);
    std::vector<double> theta;
    for (int i = 0; i < 10'000; ++i) {
        const Pack p = src.next();
        CHECK(norm(build_leg_Z_star(p, r).end() + build_leg_Z(reverse_pack(p), r).end()) < 1e-9);
        theta.push_back(p.theta());
    }
    // exponential tail of the leg duration: log P(theta > s) decreases linearly
    std::vector<double> s;
    std::vector<double> logp;
    std::vector<double> w;
    for (double x = 100.0; x <= 300.0; x += 25.0) {
        const auto above = static_cast<double>(std::count_if(theta.begin(), theta.end(), [&](double t) { return t > x; }));
        if (above >= 10.0) {
            s.push_back(x);
            logp.push_back(std::log(above / static_cast<double>(theta.size())));
            w.push_back(above);
        }
    }
    REQUIRE(s.size() >= 3);
    CHECK(weighted_line_fit(s, logp, w).slope < 0.0);
}

TEST_CASE("Z^(k)")
{
    constexpr double r = 0.05;
    int single = 0;
    int multiple = 0;
    for (std::uint64_t k = 0; k < 3000 && (single < 5 || multiple < 5); ++k) {
        RngStream rng(40, k);
        const FlightStream fs = generate_flight_stream(rng, 30.0);
        const ZResult z = build_Z(fs, r, fs.duration());
        const PiecewisePath y = build_Y(fs);
        std::vector<std::size_t> on;
        for (const auto& e : z.eta) {
            if (e.eta) {
                on.push_back(static_cast<std::size_t>(e.j));
            }
        }
        if (on.empty()) {
            CHECK(max_deviation(build_Z_k(fs, 1, r), y) < 1e-9);
        } else if (on.size() == 1) {
            ++single;
            CHECK(max_deviation(build_Z_k(fs, on[0], r), z.path) < 1e-9);
        } else {
            ++multiple;
            // Z^(k) follows Y on flight m != k, so it differs from Z there
            const PiecewisePath zk = build_Z_k(fs, on[0], r);
            CHECK(max_deviation(zk, z.path) > 1e-9);
        }
    }
    CHECK(single >= 5);
}

TEST_CASE("concatenated legs agree with the full exploration before the first inter-leg event or leg mismatch")
{
    constexpr double r = 0.05;
    int compared = 0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        RngStream rng(41, k);
        FlightStream fs = generate_flight_stream(rng, 0.0, 2);
        extend_flight_stream(fs, rng, 800);
        auto packs = cut_packs(fs);
        if (packs.size() > 4) {
            packs.resize(4);
        }
        const MultiLeg ml = concatenate_legs(fs, packs, r);
        const auto ev = interleg_events(ml.X, ml.leg_end, r);
        std::size_t rho = ev.size();
        for (std::size_t j = 0; j < ev.size(); ++j) {
            if (ev[j].w_hat || ev[j].w_tilde) {
                rho = j;
                break;
            }
        }
        // a leg mismatch ends the agreement at the end of that leg
        double until = rho == 0 ? 0.0 : ml.leg_end[rho - 1];
        for (std::size_t j = 0; j < ml.leg_mismatch.size(); ++j) {
            if (ml.leg_mismatch[j]) {
                until = std::min(until, ml.leg_end[j]);
                break;
            }
        }
        if (until <= 0.0) {
            continue;
        }
        ++compared;
        const ExplorationResult full = explore(fs, r, ml.leg_end.back());
        const auto div = first_divergence(ml.X, full.path, 1e-9);
        if (div) {
            CHECK(*div >= until);
        }
    }
    CHECK(compared > 100);
}
