#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lorentz {

/// Frequency estimate with a 95% Wilson interval.
struct EstimateCI {
    double estimate = 0.0;
    double half_width = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
};

EstimateCI wilson_ci(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

double normal_quantile(double p);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }
    CompensatedSum& operator+=(const CompensatedSum& o)
    {
        add(o.sum_);
        add(o.comp_);
        return *this;
    }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 0.0;
    int dof = 0;
};

/// Asymptotic Kolmogorov tail P(K > lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda);

/// One-sample KS test against a continuous cdf (Stephens' small-sample correction).
TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);
/// Two-sample KS test.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Chi-square homogeneity test of two count histograms over the same bins.
/// Tail bins are pooled until every expected count is at least 5.
TestResult chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
/// Chi-square goodness of fit against bin probabilities (pooled as above).
TestResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    std::size_t points = 0;
};

/// Weighted least squares y = a + b x; weights are inverse variances.
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w);

/// log-log slope of probabilities p_i against r_i, weighting each point by the
/// inverse delta-method variance of log p_hat, n p / (1 - p).
LineFit loglog_probability_slope(std::span<const double> r, std::span<const EstimateCI> est);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  ///< unbiased
double quantile(std::vector<double> xs, double q);  ///< linear interpolation
double pearson_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace lorentz
