#include "lorentz/geometry.hpp"

#include <algorithm>
#include <limits>

namespace lorentz {

UnitVec3 reflect(const UnitVec3& v, const UnitVec3& n)
{
    const Vec3& vv = v.vec();
    const Vec3& nn = n.vec();
    return UnitVec3::normalized(vv - 2.0 * dot(vv, nn) * nn);
}

std::optional<SphereHit> first_sphere_hit(const Vec3& p, const UnitVec3& v, const Vec3& c, double radius,
                                          double t_max, HitDiagnostics* diag)
{
    const Vec3 w = p - c;
    const double dist2 = norm2(w);
    const double inner = radius * (1.0 - kGeomRelTol);
    if (dist2 < inner * inner) {
        throw DegenerateGeometry("mover is inside a scatterer");
    }
    const double b = dot(w, v.vec());
    if (b >= 0.0) {
        return std::nullopt;  // moving away from (or tangent to) the center
    }
    const double cterm = dist2 - radius * radius;
    const double disc = b * b - cterm;
    if (disc < 0.0) {
        return std::nullopt;
    }
    // entry root -b - sqrt(disc), in the cancellation-free form
    const double t = cterm / (-b + std::sqrt(disc));
    if (!(t > 0.0) || t > t_max) {
        return std::nullopt;
    }
    const Vec3 impact = p + t * v.vec();
    const UnitVec3 n = UnitVec3::normalized(impact - c);
    if (std::abs(dot(v.vec(), n.vec())) < kGrazingCos) {
        if (diag != nullptr) {
            ++diag->grazing_misses;
        }
        return std::nullopt;
    }
    return SphereHit{t, n};
}

double angle(const UnitVec3& u, const UnitVec3& v)
{
    return std::acos(std::clamp(dot(u.vec(), v.vec()), -1.0, 1.0));
}

double point_segment_distance(const Vec3& q, const Vec3& a, const UnitVec3& d, double len)
{
    const Vec3 rel = q - a;
    const double s = std::clamp(dot(rel, d.vec()), 0.0, len);
    return norm(rel - s * d.vec());
}

namespace {

struct Interval {
    double lo = 0.0;
    double hi = -1.0;
    bool empty() const { return !(hi > lo); }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// {t : a t^2 + 2 b t + c < 0} for a > 0.
Interval quadratic_sublevel(double a, double b, double c)
{
    const double disc = b * b - a * c;
    if (disc <= 0.0) {
        return {};
    }
    const double sq = std::sqrt(disc);
    return {(-b - sq) / a, (-b + sq) / a};
}

}  // namespace

double sojourn_length(const Vec3& x, const UnitVec3& w, const UnitVec3& e, double s)
{
    // Distance from x + t' w to the ray {-t e : t >= 0}; its sublevel set in t'
    // is an interval, the union of the part near the ray's apex (ball) and the
    // part alongside the ray (half-cylinder).
    const Vec3 a = -e.vec();
    const Vec3& wv = w.vec();

    Interval ball = quadratic_sublevel(1.0, dot(x, wv), norm2(x) - s * s);

    const Vec3 xp = x - dot(x, a) * a;
    const Vec3 wp = wv - dot(wv, a) * a;
    const double A = norm2(wp);
    const double C = norm2(xp) - s * s;
    Interval cyl;
    if (A > 1e-30) {
        cyl = quadratic_sublevel(A, dot(xp, wp), C);
    } else if (C < 0.0) {
        cyl = {-kInf, kInf};
    }
    if (!cyl.empty()) {
        // restrict to the side where the foot point lies on the ray, (x + t' w).a > 0
        const double xa = dot(x, a);
        const double wa = dot(wv, a);
        if (wa > 0.0) {
            cyl.lo = std::max(cyl.lo, -xa / wa);
        } else if (wa < 0.0) {
            cyl.hi = std::min(cyl.hi, -xa / wa);
        } else if (xa <= 0.0) {
            cyl = {};
        }
    }

    Interval all;
    if (ball.empty()) {
        all = cyl;
    } else if (cyl.empty()) {
        all = ball;
    } else {
        all = {std::min(ball.lo, cyl.lo), std::max(ball.hi, cyl.hi)};
    }
    if (all.empty()) {
        return 0.0;
    }
    if (std::isinf(all.hi)) {
        return kInf;
    }
    return std::max(0.0, all.hi - std::max(all.lo, 0.0));
}

Vec3 scatterer_center(const Vec3& at, const UnitVec3& v_in, const UnitVec3& v_out, double r)
{
    if (v_in == v_out) {
        throw DegenerateGeometry("identical incoming and outgoing velocity");
    }
    const Vec3 d = v_in.vec() - v_out.vec();
    return at + (r / norm(d)) * d;
}

}  // namespace lorentz
