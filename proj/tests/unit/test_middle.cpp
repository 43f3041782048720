#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lorentz/flight.hpp"
#include "lorentz/middle.hpp"

using namespace lorentz;

TEST_CASE("return ray that misses ball A")
{
    // u and v both point away from the origin's side: the return ray never comes back
    const MiddleOutcome m = middle_segment_evaluate(kE2, 2.0, UnitVec3::normalized({1, 1, 0}), 0.01);
    CHECK_FALSE(m.in_A_tilde);
    CHECK_FALSE(m.in_A_hat);
}

TEST_CASE("back-scattering into the incoming ray")
{
    const MiddleOutcome m = middle_segment_evaluate(-kE1, 0.5, kE2, 0.01);
    CHECK(m.in_A_hat);
    CHECK(m.w_hat == -kE1);
}

TEST_CASE("sampled trapped trajectories defocus and obey the trapping-time bound")
{
    RngStream rng(61, 0);
    int trapped = 0;
    for (int k = 0; k < 400'000; ++k) {
        const MiddleOutcome m = middle_segment_sample(rng, 0.05);
        CHECK_FALSE(m.degenerate);
        if (m.in_A_tilde) {
            ++trapped;
            CHECK(m.defocusing_ok);
            CHECK(m.beta_bound_ok);
            CHECK(m.beta_tilde >= *m.sigma_tilde - 1e-12);
            CHECK(m.n.vec().x >= 0.0);
        }
    }
    CHECK(trapped > 100);
}

TEST_CASE("members of either set satisfy the sine inclusion")
{
    RngStream rng(62, 0);
    for (int k = 0; k < 200'000; ++k) {
        const UnitVec3 u = sample_direction(rng);
        const UnitVec3 v = sample_direction(rng);
        const double h = 2.5 + 47.5 * rng.uniform();
        const MiddleOutcome m = middle_segment_evaluate(u, h, v, 1.0, false);
        if (m.in_A_hat || m.in_A_tilde) {
            const double a = m.in_A_hat ? angle(-kE1, u) : angle(-u, v);
            CHECK(std::sin(a) <= 2.0 / h + 1e-12);
        }
    }
}

TEST_CASE("truncation bound")
{
    CHECK(std::isinf(lambda_truncation_bound(2.0)));
    CHECK(std::isinf(lambda_truncation_bound(1.0)));
    // midpoint quadrature of int_H^inf P(angle < pi/2, sin angle < 2/h) dh
    for (double H : {2.5, 50.0, 100.0}) {
        double q = 0.0;
        const double dh = 0.01;
        for (double h = H + dh / 2; h < 1e5; h += dh) {
            const double s = 2.0 / h;
            q += 0.5 * (1.0 - std::sqrt(1.0 - s * s)) * dh;
        }
        q += 1.0 / 1e5;  // the integrand is 1/h^2 beyond 1e5
        CHECK(lambda_truncation_bound(H) == doctest::Approx(q).epsilon(1e-3));
    }
}
