#include "lorentz/path.hpp"

#include <algorithm>
#include <limits>

namespace lorentz {

void PiecewisePath::extend(const UnitVec3& v, double dt)
{
    if (!(dt > 0.0)) {
        return;
    }
    const double t_new = times_.back() + dt;
    if (!velocities_.empty() && velocities_.back() == v) {
        const std::size_t i = velocities_.size() - 1;
        times_.back() = t_new;
        points_.back() = points_[i] + (t_new - times_[i]) * v.vec();
        return;
    }
    points_.push_back(points_.back() + dt * v.vec());
    times_.push_back(t_new);
    velocities_.push_back(v);
}

std::size_t PiecewisePath::segment_at(double t) const
{
    if (velocities_.empty()) {
        return 0;
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t idx = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    return std::min(idx, velocities_.size() - 1);
}

Vec3 PiecewisePath::position(double t) const
{
    if (velocities_.empty() || t <= times_.front()) {
        return points_.front();
    }
    if (t >= times_.back()) {
        return points_.back();
    }
    const std::size_t i = segment_at(t);
    return points_[i] + (t - times_[i]) * velocities_[i].vec();
}

UnitVec3 PiecewisePath::velocity(double t) const
{
    if (velocities_.empty()) {
        throw std::logic_error("velocity of an empty path");
    }
    return velocities_[segment_at(t)];
}

PiecewisePath PiecewisePath::reversed() const
{
    PiecewisePath out(points_.back(), 0.0);
    for (std::size_t i = velocities_.size(); i-- > 0;) {
        out.extend(-velocities_[i], times_[i + 1] - times_[i]);
    }
    // snap the merged breakpoints onto the original ones to avoid drift
    for (std::size_t k = 0; k < out.points_.size(); ++k) {
        const double t = out.times_[k];
        out.points_[k] = position(end_time() - t);
    }
    if (outgoing) {
        out.incoming = -*outgoing;
    }
    if (incoming) {
        out.outgoing = -*incoming;
    }
    return out;
}

PiecewisePath PiecewisePath::shifted(const Vec3& offset, double dt) const
{
    PiecewisePath out = *this;
    for (auto& p : out.points_) {
        p += offset;
    }
    for (auto& t : out.times_) {
        t += dt;
    }
    return out;
}

std::vector<PathScatterer> path_scatterers(const PiecewisePath& path, double r)
{
    std::vector<PathScatterer> out;
    const auto& vel = path.velocities();
    if (vel.empty()) {
        return out;
    }
    const auto& pts = path.points();
    const auto& ts = path.times();
    if (path.incoming && !(*path.incoming == vel.front())) {
        out.push_back({ts.front(), scatterer_center(pts.front(), *path.incoming, vel.front(), r)});
    }
    for (std::size_t i = 1; i < vel.size(); ++i) {
        out.push_back({ts[i], scatterer_center(pts[i], vel[i - 1], vel[i], r)});
    }
    if (path.outgoing && !(*path.outgoing == vel.back())) {
        out.push_back({ts.back(), scatterer_center(pts.back(), vel.back(), *path.outgoing, r)});
    }
    return out;
}

double path_point_distance(const PiecewisePath& path, const Vec3& q, double t_lo, double t_hi)
{
    const auto& ts = path.times();
    const auto& vel = path.velocities();
    const auto& pts = path.points();
    double best = std::numeric_limits<double>::infinity();
    if (vel.empty()) {
        return distance(q, pts.front());
    }
    t_lo = std::max(t_lo, path.start_time());
    t_hi = std::min(t_hi, path.end_time());
    if (t_hi < t_lo) {
        return best;
    }
    for (std::size_t i = path.segment_at(t_lo); i < vel.size() && ts[i] <= t_hi; ++i) {
        const double a = std::max(ts[i], t_lo);
        const double b = std::min(ts[i + 1], t_hi);
        const Vec3 start = pts[i] + (a - ts[i]) * vel[i].vec();
        best = std::min(best, point_segment_distance(q, start, vel[i], b - a));
    }
    return best;
}

namespace {

std::vector<double> merged_breakpoints(const PiecewisePath& a, const PiecewisePath& b, double& lo, double& hi)
{
    lo = std::max(a.start_time(), b.start_time());
    hi = std::min(a.end_time(), b.end_time());
    std::vector<double> ts;
    ts.reserve(a.times().size() + b.times().size());
    for (double t : a.times()) {
        if (t > lo && t < hi) {
            ts.push_back(t);
        }
    }
    for (double t : b.times()) {
        if (t > lo && t < hi) {
            ts.push_back(t);
        }
    }
    ts.push_back(lo);
    ts.push_back(hi);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

}  // namespace

double max_deviation(const PiecewisePath& a, const PiecewisePath& b)
{
    double lo = 0.0;
    double hi = 0.0;
    double worst = 0.0;
    for (double t : merged_breakpoints(a, b, lo, hi)) {
        if (t < lo || t > hi) {
            continue;
        }
        worst = std::max(worst, distance(a.position(t), b.position(t)));
    }
    return worst;
}

std::optional<double> first_divergence(const PiecewisePath& a, const PiecewisePath& b, double tol0)
{
    double lo = 0.0;
    double hi = 0.0;
    const auto ts = merged_breakpoints(a, b, lo, hi);
    auto excess = [&](double t) { return distance(a.position(t), b.position(t)) - tol0 * (1.0 + t); };
    if (ts.empty() || hi < lo) {
        return std::nullopt;
    }
    if (excess(ts.front()) > 0.0) {
        return ts.front();
    }
    for (std::size_t k = 1; k < ts.size(); ++k) {
        if (excess(ts[k]) <= 0.0) {
            continue;
        }
        // the excess is convex on [ts[k-1], ts[k]]: bisect for the upcrossing
        double l = ts[k - 1];
        double h = ts[k];
        for (int it = 0; it < 100 && h - l > 1e-15 * (1.0 + h); ++it) {
            const double m = 0.5 * (l + h);
            (excess(m) > 0.0 ? h : l) = m;
        }
        return h;
    }
    return std::nullopt;
}

}  // namespace lorentz
