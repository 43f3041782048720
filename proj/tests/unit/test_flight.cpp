#include <doctest.h>

#include <cmath>

#include "lorentz/flight.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/stats.hpp"

using namespace lorentz;

TEST_CASE("philox4x32-10 known answers")
{
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are determined by (seed, stream id)")
{
    RngStream a(42, 3);
    RngStream b(42, 3);
    RngStream c(42, 4);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs |= x != c.next_u64();
    }
    CHECK(differs);
}

TEST_CASE("flight time laws")
{
    RngStream rng(1, 0);
    constexpr int n = 1'000'000;
    double none = 0.0;
    double shrt = 0.0;
    double lng = 0.0;
    for (int i = 0; i < n; ++i) {
        none += sample_flight_time(rng);
        shrt += sample_flight_time(rng, FlightCondition::short_flight);
        lng += sample_flight_time(rng, FlightCondition::long_flight);
    }
    CHECK(none / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(shrt / n == doctest::Approx((std::exp(1.0) - 2.0) / (std::exp(1.0) - 1.0)).epsilon(0.005 / 0.418));
    CHECK(lng / n == doctest::Approx(2.0).epsilon(0.005));
}

TEST_CASE("directions are uniform on the sphere")
{
    RngStream rng(2, 0);
    constexpr int n = 1'000'000;
    Vec3 m{};
    double zz = 0.0;
    std::vector<double> z;
    for (int i = 0; i < n; ++i) {
        const UnitVec3 u = sample_direction(rng);
        m += u.vec();
        zz += u.z() * u.z();
        if (i < 100'000) {
            z.push_back(u.z());
        }
    }
    CHECK(norm(m / n) < 0.005);
    CHECK(std::abs(zz / n - 1.0 / 3.0) < 0.003);
    CHECK(ks_one_sample(z, [](double c) { return (c + 1.0) / 2.0; }).p_value > 0.01);
}

TEST_CASE("flight streams")
{
    RngStream rng(3, 0);
    CHECK(generate_flight_stream(rng, 0.001).size() >= 1);

    constexpr double T = 100.0;
    double nu = 0.0;
    std::uint64_t shorts = 0;
    std::uint64_t flights = 0;
    constexpr int trials = 4000;
    for (int k = 0; k < trials; ++k) {
        RngStream s(4, static_cast<std::uint64_t>(k));
        const FlightStream fs = generate_flight_stream(s, T);
        nu += static_cast<double>(fs.nu(T));
        for (const auto& f : fs.flights) {
            shorts += f.eps ? 1 : 0;
            CHECK(f.eps == (f.xi < 1.0));
        }
        flights += fs.size();
    }
    CHECK(nu / trials / T == doctest::Approx(1.0).epsilon(0.02));
    CHECK(static_cast<double>(shorts) / static_cast<double>(flights) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.002 / 0.632));
}

TEST_CASE("Y path")
{
    FlightStream fs;
    fs.u0 = kE2;
    fs.flights = {Flight::make(2.0, kE1)};
    const PiecewisePath y = build_Y(fs);
    CHECK(norm(y.position(1.0) - Vec3{1, 0, 0}) < 1e-15);
    CHECK(norm(y.position(2.0) - Vec3{2, 0, 0}) < 1e-15);

    RngStream rng(5, 0);
    const FlightStream g = generate_flight_stream(rng, 50.0);
    const PiecewisePath p = build_Y(g);
    Vec3 sum{};
    for (std::size_t j = 1; j <= g.size(); ++j) {
        sum += g.flight(j).xi * g.u(j).vec();
        CHECK(norm(p.position(g.tau(j)) - sum) < 1e-12);
    }
}

TEST_CASE("mean squared displacement of Y")
{
    constexpr double t = 50.0;
    constexpr int trials = 10'000;
    double msd = 0.0;
    for (int k = 0; k < trials; ++k) {
        RngStream rng(6, static_cast<std::uint64_t>(k));
        msd += norm2(build_Y(generate_flight_stream(rng, t)).position(t));
    }
    const double oracle = 2.0 * t - 2.0 * (1.0 - std::exp(-t));
    CHECK(std::abs(msd / trials - oracle) < 2.0);
}

TEST_CASE("virtual scatterers")
{
    const double r = 0.1;
    FlightStream fs;
    fs.u0 = kE1;
    fs.flights = {Flight::make(1.0, -kE1), Flight::make(1.0, kE2)};
    auto v = virtual_scatterers(fs, r);
    REQUIRE(v.size() >= 1);
    CHECK(norm(v[0] - Vec3{0.1, 0, 0}) < 1e-12);

    FlightStream g;
    g.u0 = kE1;
    g.flights = {Flight::make(1.0, kE2)};
    v = virtual_scatterers(g, r);
    CHECK(norm(v[0] - Vec3{0.1 / std::sqrt(2.0), -0.1 / std::sqrt(2.0), 0}) < 1e-12);

    RngStream rng(8, 0);
    const FlightStream h = generate_flight_stream(rng, 30.0);
    const PiecewisePath y = build_Y(h);
    v = virtual_scatterers(h, r);
    for (std::size_t k = 0; k < v.size(); ++k) {
        CHECK(distance(v[k], y.position(h.tau(k))) == doctest::Approx(r).epsilon(1e-12));
    }
}
