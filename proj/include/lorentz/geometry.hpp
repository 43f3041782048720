#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace lorentz {

/// Thrown when a geometric precondition is violated in a way that signals
/// corrupted simulation state (e.g. a mover found inside a scatterer).
class DegenerateGeometry : public std::runtime_error {
public:
    explicit DegenerateGeometry(const std::string& what) : std::runtime_error(what) {}
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline bool is_finite(const Vec3& a) { return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z); }

/// Unit vector. Every construction renormalizes, so | |u| - 1 | stays at
/// rounding level however many reflections are chained.
class UnitVec3 {
public:
    constexpr UnitVec3() : v_{1.0, 0.0, 0.0} {}

    /// Normalizes `v`; throws DegenerateGeometry on a zero or non-finite vector.
    static UnitVec3 normalized(const Vec3& v)
    {
        const double n = norm(v);
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw DegenerateGeometry("cannot normalize zero or non-finite vector");
        }
        return UnitVec3(v / n);
    }

    /// Wraps a vector already known to be of unit length (no renormalization).
    static constexpr UnitVec3 trusted(const Vec3& v) { return UnitVec3(v); }

    constexpr const Vec3& vec() const { return v_; }
    constexpr operator const Vec3&() const { return v_; }  // NOLINT(google-explicit-constructor)
    constexpr double x() const { return v_.x; }
    constexpr double y() const { return v_.y; }
    constexpr double z() const { return v_.z; }

    friend constexpr UnitVec3 operator-(const UnitVec3& u) { return UnitVec3(-u.v_); }
    friend constexpr bool operator==(const UnitVec3&, const UnitVec3&) = default;

private:
    constexpr explicit UnitVec3(const Vec3& v) : v_(v) {}
    Vec3 v_;
};

inline constexpr UnitVec3 kE1 = UnitVec3::trusted({1.0, 0.0, 0.0});
inline constexpr UnitVec3 kE2 = UnitVec3::trusted({0.0, 1.0, 0.0});
inline constexpr UnitVec3 kE3 = UnitVec3::trusted({0.0, 0.0, 1.0});

/// Relative tolerance used for all geometric equalities.
inline constexpr double kGeomRelTol = 1e-9;
/// Hits with |v.n| below this are grazing and treated as misses.
inline constexpr double kGrazingCos = 1e-12;

/// Counters for rare numerical situations met by the hit finder.
struct HitDiagnostics {
    std::uint64_t grazing_misses = 0;
};

/// Elastic reflection v' = v - 2 (v.n) n, renormalized.
UnitVec3 reflect(const UnitVec3& v, const UnitVec3& n);

struct SphereHit {
    double t = 0.0;
    UnitVec3 normal;  ///< outward normal at the impact point
};

/// First time t in (0, t_max] at which p + t v meets the sphere |x - c| = radius.
/// Throws DegenerateGeometry if p is inside the sphere beyond tolerance.
std::optional<SphereHit> first_sphere_hit(const Vec3& p, const UnitVec3& v, const Vec3& c, double radius,
                                          double t_max, HitDiagnostics* diag = nullptr);

/// Angle in [0, pi] between unit vectors; the cosine is clamped before acos.
double angle(const UnitVec3& u, const UnitVec3& v);

/// Distance from point q to the segment a + s d, s in [0, len] (d unit).
double point_segment_distance(const Vec3& q, const Vec3& a, const UnitVec3& d, double len);

/// Lebesgue measure of {t' > 0 : min_{t >= 0} |x + t' w + t e| < s}.
/// Returns +infinity in the parallel case w = -e with the line inside the tube.
double sojourn_length(const Vec3& x, const UnitVec3& w, const UnitVec3& e, double s);

/// Center at distance r from `at` in the direction (v_in - v_out)/|v_in - v_out|:
/// the sphere that would turn v_in into v_out by a specular bounce at `at`.
/// Throws DegenerateGeometry if v_in == v_out bitwise.
Vec3 scatterer_center(const Vec3& at, const UnitVec3& v_in, const UnitVec3& v_out, double r);

}  // namespace lorentz
