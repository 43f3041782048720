#include "lorentz/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lorentz/stats.hpp"

namespace lorentz {

RadialHistogram::RadialHistogram(double r) : inner_(r / 4.0), log_ratio_(std::log(kOuter / (r / 4.0))) {}

double RadialHistogram::edge(int i) const
{
    return inner_ * std::exp(log_ratio_ * static_cast<double>(i) / kShells);
}

double RadialHistogram::shell_volume(int i) const
{
    const double a = edge(i);
    const double b = edge(i + 1);
    return 4.0 / 3.0 * std::numbers::pi * (b * b * b - a * a * a);
}

int RadialHistogram::shell_of(double rho) const
{
    if (rho < inner_) {
        return -1;
    }
    if (rho >= kOuter) {
        return kShells;
    }
    const int i = static_cast<int>(std::floor(kShells * std::log(rho / inner_) / log_ratio_));
    return std::clamp(i, 0, kShells - 1);
}

void RadialHistogram::add_point(const Vec3& x, double weight)
{
    total_ += weight;
    const double rho = norm(x);
    if (rho < 1.0) {
        unit_ball_ += weight;
    }
    const int i = shell_of(rho);
    if (i < 0) {
        below_ += weight;
    } else if (i >= kShells) {
        above_ += weight;
    } else {
        mass_[static_cast<std::size_t>(i)] += weight;
        ++hits_[static_cast<std::size_t>(i)];
    }
}

void RadialHistogram::add_segment(const Vec3& a, const UnitVec3& v, double len)
{
    if (!(len > 0.0)) {
        return;
    }
    total_ += len;
    const double A = norm2(a);
    const double B = dot(a, v.vec());
    // time spent inside the ball of radius R
    auto inside = [&](double R) {
        const double disc = B * B - A + R * R;
        if (disc <= 0.0) {
            return 0.0;
        }
        const double sq = std::sqrt(disc);
        const double lo = std::max(0.0, -B - sq);
        const double hi = std::min(len, -B + sq);
        return std::max(0.0, hi - lo);
    };
    const double s_min = std::clamp(-B, 0.0, len);
    const double rho_min = std::sqrt(std::max(0.0, A + 2.0 * B * s_min + s_min * s_min));
    const double rho_max = std::max(std::sqrt(A), std::sqrt(std::max(0.0, A + 2.0 * B * len + len * len)));
    const int i0 = std::max(0, shell_of(rho_min));
    const int i1 = std::min(kShells - 1, shell_of(rho_max));
    double prev = inside(inner_);
    below_ += prev;
    for (int i = i0; i <= i1; ++i) {
        const double cur = inside(edge(i + 1));
        const double dt = cur - (i == i0 ? inside(edge(i)) : prev);
        if (dt > 0.0) {
            mass_[static_cast<std::size_t>(i)] += dt;
            ++hits_[static_cast<std::size_t>(i)];
        }
        prev = cur;
    }
    above_ += len - inside(kOuter);
    unit_ball_ += inside(1.0);
}

void RadialHistogram::add_path(const PiecewisePath& path)
{
    const auto& ts = path.times();
    const auto& pts = path.points();
    const auto& vel = path.velocities();
    for (std::size_t i = 0; i < vel.size(); ++i) {
        add_segment(pts[i], vel[i], ts[i + 1] - ts[i]);
    }
}

void RadialHistogram::merge(const RadialHistogram& o)
{
    if (o.inner_ != inner_) {
        if (o.total_ == 0.0 && o.trials_ == 0) {
            return;
        }
        if (total_ == 0.0 && trials_ == 0) {
            *this = o;
            return;
        }
        throw std::invalid_argument("merging histograms with different shells");
    }
    for (int i = 0; i < kShells; ++i) {
        mass_[static_cast<std::size_t>(i)] += o.mass_[static_cast<std::size_t>(i)];
        hits_[static_cast<std::size_t>(i)] += o.hits_[static_cast<std::size_t>(i)];
    }
    below_ += o.below_;
    above_ += o.above_;
    total_ += o.total_;
    unit_ball_ += o.unit_ball_;
    trials_ += o.trials_;
}

double RadialHistogram::density(int i) const
{
    if (trials_ == 0) {
        return 0.0;
    }
    return mass(i) / (static_cast<double>(trials_) * shell_volume(i));
}

double EnvelopeFit::envelope(double rho) const
{
    switch (kind) {
    case EnvelopeKind::K_plus_L:
        return C1 * std::min(1.0, 1.0 / rho) + C2 * std::exp(-c * rho) / (rho * rho);
    case EnvelopeKind::L:
        return C1 * std::exp(-c * rho) / (rho * rho);
    case EnvelopeKind::M:
        return C1 * std::exp(-c * rho);
    }
    return 0.0;
}

std::vector<int> usable_shells(const RadialHistogram& h, double lo, double hi, std::uint64_t min_hits)
{
    std::vector<int> out;
    for (int i = 0; i < RadialHistogram::kShells; ++i) {
        const double c = h.shell_center(i);
        if (c >= lo && c <= hi && h.hits(i) >= min_hits && h.mass(i) > 0.0) {
            out.push_back(i);
        }
    }
    return out;
}

EnvelopeFit fit_envelope(const RadialHistogram& h, EnvelopeKind kind, const std::vector<int>& shells)
{
    EnvelopeFit fit;
    fit.kind = kind;
    fit.shells = shells;
    if (shells.size() < 2) {
        fit.max_min_ratio = std::numeric_limits<double>::infinity();
        return fit;
    }
    std::vector<double> rho;
    std::vector<double> logd;
    for (int i : shells) {
        rho.push_back(h.shell_center(i));
        logd.push_back(std::log(h.density(i)));
    }
    const std::size_t n = rho.size();
    if (kind == EnvelopeKind::L || kind == EnvelopeKind::M) {
        std::vector<double> y(n);
        std::vector<double> w(n, 1.0);
        for (std::size_t k = 0; k < n; ++k) {
            y[k] = kind == EnvelopeKind::L ? logd[k] + 2.0 * std::log(rho[k]) : logd[k];
        }
        const LineFit lf = weighted_line_fit(rho, y, w);
        fit.C1 = std::exp(lf.intercept);
        fit.c = -lf.slope;
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (int ic = 0; ic <= 60; ++ic) {
            const double c = 0.01 * std::pow(10.0, 3.0 * ic / 60.0);
            for (int iq = 0; iq <= 96; ++iq) {
                const double q = std::pow(10.0, -4.0 + 8.0 * iq / 96.0);
                double sum = 0.0;
                std::vector<double> res(n);
                for (std::size_t k = 0; k < n; ++k) {
                    const double f = std::min(1.0, 1.0 / rho[k]) + q * std::exp(-c * rho[k]) / (rho[k] * rho[k]);
                    res[k] = logd[k] - std::log(f);
                    sum += res[k];
                }
                const double logc1 = sum / static_cast<double>(n);
                double sse = 0.0;
                for (double x : res) {
                    sse += (x - logc1) * (x - logc1);
                }
                if (sse < best) {
                    best = sse;
                    fit.C1 = std::exp(logc1);
                    fit.C2 = q * fit.C1;
                    fit.c = c;
                }
            }
        }
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double ratio = std::exp(logd[k]) / fit.envelope(rho[k]);
        fit.ratio.push_back(ratio);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    fit.max_min_ratio = hi / lo;
    return fit;
}

SlopeEstimate shell_density_slope(const RadialHistogram& h, const std::vector<int>& shells)
{
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    for (int i : shells) {
        x.push_back(std::log(h.shell_center(i)));
        y.push_back(std::log(h.density(i)));
        w.push_back(static_cast<double>(h.hits(i)));  // Poisson counts: var(log) ~ 1/hits
    }
    if (x.size() < 2) {
        return {std::nan(""), std::nan("")};
    }
    const LineFit lf = weighted_line_fit(x, y, w);
    return {lf.slope, lf.slope_se};
}

}  // namespace lorentz
