#pragma once

#include <optional>
#include <vector>

#include "lorentz/geometry.hpp"

namespace lorentz {

/// Speed-1 piecewise-linear trajectory. Breakpoint i sits at times()[i] and
/// points()[i]; segment i runs from breakpoint i to i+1 with velocities()[i].
/// Consecutive segments with bitwise-equal velocity are merged, so interior
/// breakpoints are exactly the velocity changes.
class PiecewisePath {
public:
    PiecewisePath() : times_{0.0}, points_{Vec3{}} {}
    explicit PiecewisePath(const Vec3& start, double t0 = 0.0) : times_{t0}, points_{start} {}

    /// Appends a segment of duration dt > 0 with velocity v.
    void extend(const UnitVec3& v, double dt);

    const std::vector<double>& times() const { return times_; }
    const std::vector<Vec3>& points() const { return points_; }
    const std::vector<UnitVec3>& velocities() const { return velocities_; }
    std::size_t segment_count() const { return velocities_.size(); }

    double start_time() const { return times_.front(); }
    double end_time() const { return times_.back(); }
    const Vec3& start() const { return points_.front(); }
    const Vec3& end() const { return points_.back(); }

    /// Position at time t, clamped into [start_time, end_time].
    Vec3 position(double t) const;
    /// Velocity on the segment containing t (right-continuous).
    UnitVec3 velocity(double t) const;
    /// Index of the segment containing t (right-continuous, clamped).
    std::size_t segment_at(double t) const;

    /// Velocity just before start_time / just after end_time, when known.
    std::optional<UnitVec3> incoming;
    std::optional<UnitVec3> outgoing;

    /// Same curve run backwards, starting at time 0 from end(); incoming and
    /// outgoing velocities are swapped and negated.
    PiecewisePath reversed() const;
    /// Copy with every point shifted by `offset` and every time by `dt`.
    PiecewisePath shifted(const Vec3& offset, double dt = 0.0) const;

private:
    std::vector<double> times_;
    std::vector<Vec3> points_;
    std::vector<UnitVec3> velocities_;
};

/// Scatterer center implied by a velocity change at time t.
struct PathScatterer {
    double t = 0.0;
    Vec3 center;
};

/// Centers that would cause every velocity change of the path, including the
/// boundary ones if `incoming`/`outgoing` are set and differ from the path.
std::vector<PathScatterer> path_scatterers(const PiecewisePath& path, double r);

/// Minimum distance from q to the path restricted to times in [t_lo, t_hi].
double path_point_distance(const PiecewisePath& path, const Vec3& q, double t_lo, double t_hi);

/// max |a(t) - b(t)| over the common time domain. Exact for piecewise-linear
/// paths: the difference is linear between consecutive merged breakpoints.
double max_deviation(const PiecewisePath& a, const PiecewisePath& b);

/// First time at which |a(t) - b(t)| exceeds tol(t) = tol0 * (1 + t), or
/// nullopt if it never does on the common domain.
std::optional<double> first_divergence(const PiecewisePath& a, const PiecewisePath& b, double tol0);

}  // namespace lorentz
