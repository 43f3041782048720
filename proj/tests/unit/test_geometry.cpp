#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lorentz/flight.hpp"
#include "lorentz/geometry.hpp"
#include "lorentz/rng.hpp"

using namespace lorentz;

namespace {

void check_vec(const Vec3& a, const Vec3& b, double tol = 1e-12)
{
    CHECK(a.x == doctest::Approx(b.x).epsilon(tol).scale(1.0));
    CHECK(a.y == doctest::Approx(b.y).epsilon(tol).scale(1.0));
    CHECK(a.z == doctest::Approx(b.z).epsilon(tol).scale(1.0));
}

UnitVec3 unit(double x, double y, double z)
{
    return UnitVec3::normalized({x, y, z});
}

}  // namespace

TEST_CASE("reflect")
{
    check_vec(reflect(unit(0, 0, -1), kE3), {0, 0, 1});
    check_vec(reflect(kE1, kE3), {1, 0, 0});
    const double h = std::sqrt(2.0) / 2.0;
    check_vec(reflect(unit(h, 0, -h), kE3), {h, 0, h});
}

TEST_CASE("first_sphere_hit")
{
    auto hit = first_sphere_hit({-2, 0, 0}, kE1, {}, 1.0, 10.0);
    REQUIRE(hit);
    CHECK(hit->t == doctest::Approx(1.0));
    check_vec(hit->normal, {-1, 0, 0});

    CHECK_FALSE(first_sphere_hit({-2, 5, 0}, kE1, {}, 1.0, 10.0));

    hit = first_sphere_hit({-2, 0.6, 0}, kE1, {}, 1.0, 10.0);
    REQUIRE(hit);
    CHECK(hit->t == doctest::Approx(2.0 - 0.8));

    CHECK_FALSE(first_sphere_hit({-2, 0, 0}, kE1, {}, 1.0, 0.5));
    CHECK_THROWS_AS(first_sphere_hit({0.2, 0, 0}, kE1, {}, 1.0, 10.0), DegenerateGeometry);
}

TEST_CASE("first_sphere_hit agrees with a fine time grid")
{
    RngStream rng(7, 0);
    int disagreements = 0;
    for (int k = 0; k < 2000; ++k) {
        const Vec3 c{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
        const double rad = 0.2 + 0.5 * rng.uniform();
        if (norm(c) <= rad) {
            continue;
        }
        const UnitVec3 v = sample_direction(rng);
        const auto hit = first_sphere_hit({}, v, c, rad, 5.0);
        const double dt = 1e-4;
        double grid = -1.0;
        for (double t = 0.0; t <= 5.0; t += dt) {
            if (norm(t * v.vec() - c) < rad) {
                grid = t;
                break;
            }
        }
        if (hit.has_value() != (grid >= 0.0)) {
            // tangential rays can fall on either side of a grid
            const double miss = norm(c - dot(c, v.vec()) * v.vec());
            if (std::abs(miss - rad) > 1e-3) {
                ++disagreements;
            }
        } else if (hit) {
            CHECK(std::abs(hit->t - grid) <= dt);
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("angle")
{
    CHECK(angle(kE1, kE1) == doctest::Approx(0.0));
    CHECK(angle(kE1, -kE1) == doctest::Approx(std::numbers::pi));
    CHECK(angle(kE1, kE2) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("sojourn_length")
{
    CHECK(sojourn_length({0, 10, 0}, kE2, kE1, 1.0) == doctest::Approx(0.0));
    // |t'| < 1 around the tip of the ray, clipped to t' > 0
    CHECK(sojourn_length({}, kE2, kE1, 1.0) == doctest::Approx(1.0));
    CHECK(sojourn_length({0.3, -0.2, 0.1}, kE3, kE1, 1e-6) < 1e-5);
}

TEST_CASE("sojourn_length against quadrature")
{
    RngStream rng(11, 0);
    for (int k = 0; k < 200; ++k) {
        const UnitVec3 e = sample_direction(rng);
        const UnitVec3 w = sample_direction(rng);
        const Vec3 x{rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5};
        const double s = 0.1 + 0.4 * rng.uniform();
        const double exact = sojourn_length(x, w, e, s);
        if (!std::isfinite(exact) || exact > 20.0) {
            continue;
        }
        // distance from a point to the ray {-t e}
        auto dist = [&](const Vec3& p) {
            const double along = -dot(p, e.vec());
            return along > 0.0 ? norm(p + along * e.vec()) : norm(p);
        };
        const double dt = 1e-4;
        double measure = 0.0;
        for (double t = dt / 2; t < 30.0; t += dt) {
            measure += dist(x + t * w.vec()) < s ? dt : 0.0;
        }
        CHECK(std::abs(exact - measure) <= 2e-3);
    }
}

TEST_CASE("scatterer_center")
{
    check_vec(scatterer_center({}, kE1, -kE1, 0.1), {0.1, 0, 0});
    const double q = 0.1 / std::sqrt(2.0);
    check_vec(scatterer_center({}, kE1, kE2, 0.1), {q, -q, 0});
    CHECK_THROWS_AS(scatterer_center({}, kE1, kE1, 0.1), DegenerateGeometry);
}
