#include <doctest.h>

#include <cmath>
#include <vector>

#include "lorentz/lab.hpp"
#include "lorentz/stats.hpp"

using namespace lorentz;

TEST_CASE("distance of the first scattering is exponential")
{
    constexpr double r = 0.01;
    const OccupationResult res = occupation_histogram(OccupationProcess::Y_first_step, r, 20'000, 51);
    const RadialHistogram& h = res.hist;
    std::vector<std::uint64_t> obs;
    std::vector<double> probs;
    obs.push_back(static_cast<std::uint64_t>(std::llround(h.below())));
    probs.push_back(1.0 - std::exp(-h.edge(0)));
    for (int i = 0; i < RadialHistogram::kShells; ++i) {
        obs.push_back(static_cast<std::uint64_t>(std::llround(h.mass(i))));
        probs.push_back(std::exp(-h.edge(i)) - std::exp(-h.edge(i + 1)));
    }
    obs.push_back(static_cast<std::uint64_t>(std::llround(h.above())));
    probs.push_back(std::exp(-h.edge(RadialHistogram::kShells)));
    CHECK(chi_square_gof(obs, probs).p_value > 0.01);
}

TEST_CASE("step and path occupation of Y have the same mean")
{
    constexpr double r = 0.01;
    OccupationOptions opts;
    opts.horizon = 50.0;
    const auto steps = occupation_histogram(OccupationProcess::Y_steps, r, 20'000, 52, opts).hist;
    const auto path = occupation_histogram(OccupationProcess::Y_path, r, 20'000, 53, opts).hist;
    const double n = 20'000.0;
    CHECK(steps.unit_ball_mass() / n == doctest::Approx(path.unit_ball_mass() / n).epsilon(0.05));
    CHECK(steps.total_weight() / n == doctest::Approx(path.total_weight() / n).epsilon(0.02));
    for (double rho : {0.3, 3.0, 10.0}) {
        const int i = steps.shell_of(rho);
        CHECK(steps.density(i) == doctest::Approx(path.density(i)).epsilon(0.15));
    }
}

TEST_CASE("histogram mass is conserved")
{
    for (auto p : {OccupationProcess::Y_path, OccupationProcess::Zstar_path, OccupationProcess::Zleg_steps}) {
        const auto h = occupation_histogram(p, 0.02, 1000, 54).hist;
        double sum = h.below() + h.above();
        for (int i = 0; i < RadialHistogram::kShells; ++i) {
            sum += h.mass(i);
        }
        CHECK(sum == doctest::Approx(h.total_weight()).epsilon(1e-12));
    }
}

TEST_CASE("results do not depend on the worker count")
{
    OccupationOptions one;
    OccupationOptions four;
    four.workers = 4;
    const auto a = occupation_histogram(OccupationProcess::Zstar_steps, 0.02, 3000, 55, one).hist;
    const auto b = occupation_histogram(OccupationProcess::Zstar_steps, 0.02, 3000, 55, four).hist;
    for (int i = 0; i < RadialHistogram::kShells; ++i) {
        CHECK(a.mass(i) == b.mass(i));
    }

    EventParams p1;
    EventParams p4;
    p4.workers = 4;
    const auto e1 = estimate_event_probability(EstimatorKind::eta, 0.02, 50'000, 56, p1);
    const auto e4 = estimate_event_probability(EstimatorKind::eta, 0.02, 50'000, 56, p4);
    CHECK(e1.ci.successes == e4.ci.successes);
    CHECK(e1.ci.trials == e4.ci.trials);

    const auto s1 = scaling_diagnostics(0.05, 10.0, 64, 57, 1);
    const auto s4 = scaling_diagnostics(0.05, 10.0, 64, 57, 4);
    CHECK(s1.sup_dev == s4.sup_dev);
}

TEST_CASE("Green-Kubo variance")
{
    CHECK(green_kubo_variance(100.0) == doctest::Approx((200.0 - 2.0 * (1.0 - std::exp(-100.0))) / 300.0));
    const auto v = y_endpoint_variance(100.0, 20'000, 58);
    for (double x : v) {
        CHECK(x == doctest::Approx(green_kubo_variance(100.0)).epsilon(0.05));
    }
}

TEST_CASE("W events of Y scale like r")
{
    EventParams p;
    p.j = 10;
    const auto a = estimate_event_probability(EstimatorKind::W_tilde, 0.04, 200'000, 59, p);
    const auto b = estimate_event_probability(EstimatorKind::W_tilde, 0.01, 200'000, 59, p);
    const double slope = std::log(a.ci.estimate / b.ci.estimate) / std::log(4.0);
    CHECK(slope > 0.7);
    CHECK(slope < 1.3);
}
