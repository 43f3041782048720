#include "lorentz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace lorentz {

EstimateCI wilson_ci(std::uint64_t successes, std::uint64_t trials, double z)
{
    if (trials == 0) {
        throw std::invalid_argument("wilson_ci: zero trials");
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    EstimateCI ci;
    ci.estimate = p;
    ci.lo = std::max(0.0, centre - half);
    ci.hi = std::min(1.0, centre + half);
    ci.half_width = half;
    ci.successes = successes;
    ci.trials = trials;
    return ci;
}

double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal(), p);
}

void CompensatedSum::add(double x)
{
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
    } else {
        comp_ += (x - t) + sum_;
    }
    sum_ = t;
}

double kolmogorov_tail(double lambda)
{
    if (lambda <= 0.0) {
        return 1.0;
    }
    if (lambda < 0.2) {
        return 1.0;  // the alternating series converges slowly here; the tail is 1 to 1e-20
    }
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf)
{
    if (xs.empty()) {
        throw std::invalid_argument("ks_one_sample: empty sample");
    }
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d), 0};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d), 0};
}

namespace {

double chi_square_sf(double stat, int dof)
{
    if (dof <= 0) {
        return 1.0;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

}  // namespace

TestResult chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("chi_square_two_sample: bin count mismatch");
    }
    const double na = std::accumulate(a.begin(), a.end(), 0.0);
    const double nb = std::accumulate(b.begin(), b.end(), 0.0);
    if (na == 0.0 || nb == 0.0) {
        throw std::invalid_argument("chi_square_two_sample: empty sample");
    }
    const double fa = na / (na + nb);
    const double fb = nb / (na + nb);
    // pool bins left to right until both expected counts reach 5
    std::vector<std::pair<double, double>> pooled;
    double ca = 0.0;
    double cb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca += static_cast<double>(a[i]);
        cb += static_cast<double>(b[i]);
        const double tot = ca + cb;
        if (tot * fa >= 5.0 && tot * fb >= 5.0) {
            pooled.emplace_back(ca, cb);
            ca = cb = 0.0;
        }
    }
    if (ca + cb > 0.0) {
        if (pooled.empty()) {
            pooled.emplace_back(ca, cb);
        } else {
            pooled.back().first += ca;
            pooled.back().second += cb;
        }
    }
    double stat = 0.0;
    for (const auto& [oa, ob] : pooled) {
        const double tot = oa + ob;
        const double ea = tot * fa;
        const double eb = tot * fb;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    const int dof = static_cast<int>(pooled.size()) - 1;
    return {stat, chi_square_sf(stat, dof), dof};
}

TestResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs)
{
    if (observed.size() != probs.size()) {
        throw std::invalid_argument("chi_square_gof: bin count mismatch");
    }
    const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
    std::vector<std::pair<double, double>> pooled;
    double o = 0.0;
    double e = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o += static_cast<double>(observed[i]);
        e += n * probs[i];
        if (e >= 5.0) {
            pooled.emplace_back(o, e);
            o = e = 0.0;
        }
    }
    if (o + e > 0.0 && !pooled.empty()) {
        pooled.back().first += o;
        pooled.back().second += e;
    }
    double stat = 0.0;
    for (const auto& [oo, ee] : pooled) {
        stat += (oo - ee) * (oo - ee) / ee;
    }
    const int dof = static_cast<int>(pooled.size()) - 1;
    return {stat, chi_square_sf(stat, dof), dof};
}

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w)
{
    if (x.size() != y.size() || x.size() != w.size() || x.size() < 2) {
        throw std::invalid_argument("weighted_line_fit: need at least two matched points");
    }
    double sw = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xm = sx / sw;
    const double ym = sy / sw;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    }
    LineFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    // with inverse-variance weights the slope variance is 1 / Sxx
    fit.slope_se = std::sqrt(1.0 / sxx);
    fit.intercept_se = std::sqrt(1.0 / sw + xm * xm / sxx);
    return fit;
}

LineFit loglog_probability_slope(std::span<const double> r, std::span<const EstimateCI> est)
{
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double p = est[i].estimate;
        if (!(p > 0.0)) {
            continue;
        }
        x.push_back(std::log(r[i]));
        y.push_back(std::log(p));
        const double n = static_cast<double>(est[i].trials);
        w.push_back(n * p / std::max(1e-300, 1.0 - p));
    }
    if (x.size() < 2) {
        LineFit none;
        none.slope = std::nan("");
        none.slope_se = std::nan("");
        none.points = x.size();
        return none;
    }
    return weighted_line_fit(x, y, w);
}

double mean(std::span<const double> xs)
{
    CompensatedSum s;
    for (double x : xs) {
        s.add(x);
    }
    return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs)
{
    if (xs.size() < 2) {
        return 0.0;
    }
    const double m = mean(xs);
    CompensatedSum s;
    for (double x : xs) {
        s.add((x - m) * (x - m));
    }
    return s.value() / static_cast<double>(xs.size() - 1);
}

double quantile(std::vector<double> xs, double q)
{
    if (xs.empty()) {
        return std::nan("");
    }
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - f) + xs[hi] * f;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b)
{
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace lorentz
