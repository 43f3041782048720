#include <doctest.h>

#include <cmath>
#include <vector>

#include "lorentz/rng.hpp"
#include "lorentz/stats.hpp"

using namespace lorentz;

TEST_CASE("Wilson interval")
{
    const EstimateCI zero = wilson_ci(0, 100);
    CHECK(zero.estimate == 0.0);
    CHECK(zero.lo == doctest::Approx(0.0));
    CHECK(zero.hi == doctest::Approx(0.03699).epsilon(1e-3));
    const EstimateCI half = wilson_ci(50, 100);
    CHECK(half.lo == doctest::Approx(0.40383).epsilon(1e-4));
    CHECK(half.hi == doctest::Approx(0.59617).epsilon(1e-4));
    CHECK(half.half_width > 0.0);
}

TEST_CASE("reference values")
{
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054));
    CHECK(kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_tail(0.0) == 1.0);
}

TEST_CASE("compensated sum")
{
    CompensatedSum s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) {
        s.add(1e-16);
    }
    s.add(-1.0);
    CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-6));
}

TEST_CASE("KS tests")
{
    RngStream rng(71, 0);
    std::vector<double> a(5000);
    std::vector<double> b(5000);
    for (auto& x : a) {
        x = rng.uniform();
    }
    for (auto& x : b) {
        x = rng.uniform();
    }
    CHECK(ks_one_sample(a, [](double x) { return x; }).p_value > 0.01);
    CHECK(ks_two_sample(a, b).p_value > 0.01);
    CHECK(ks_one_sample(a, [](double x) { return x * x; }).p_value < 1e-6);
    std::vector<double> shifted = b;
    for (auto& x : shifted) {
        x += 0.1;
    }
    CHECK(ks_two_sample(a, shifted).p_value < 1e-6);
}

TEST_CASE("chi-square tests")
{
    const std::vector<std::uint64_t> fair{1000, 1000, 1000, 1000};
    const std::vector<double> p{0.25, 0.25, 0.25, 0.25};
    const TestResult t = chi_square_gof(fair, p);
    CHECK(t.statistic == 0.0);
    CHECK(t.p_value == doctest::Approx(1.0));
    CHECK(t.dof == 3);
    const std::vector<std::uint64_t> skew{1100, 900, 1000, 1000};
    // statistic 20 on 3 degrees of freedom
    CHECK(chi_square_gof(skew, p).p_value == doctest::Approx(1.697e-4).epsilon(1e-3));
    CHECK(chi_square_two_sample(fair, fair).p_value == doctest::Approx(1.0));
}

TEST_CASE("weighted line fit")
{
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{3, 5, 7, 9};
    const std::vector<double> w{1, 2, 3, 4};
    const LineFit f = weighted_line_fit(x, y, w);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    // weights are inverse variances, so the error does not come from residuals
    CHECK(f.slope_se == doctest::Approx(1.0 / std::sqrt(10.0)));

    const std::vector<double> r{0.04, 0.02, 0.01, 0.005};
    std::vector<EstimateCI> est;
    for (double v : r) {
        est.push_back(wilson_ci(static_cast<std::uint64_t>(std::llround(1e7 * v * v)), 10'000'000));
    }
    CHECK(loglog_probability_slope(r, est).slope == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("moments and quantiles")
{
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(mean(x) == 3.0);
    CHECK(variance(x) == 2.5);
    CHECK(quantile(x, 0.5) == 3.0);
    CHECK(quantile(x, 0.25) == 2.0);
    CHECK(quantile(x, 0.9) == doctest::Approx(4.6));
    const std::vector<double> y{2, 4, 6, 8, 10};
    CHECK(pearson_correlation(x, y) == doctest::Approx(1.0));
}
