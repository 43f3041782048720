#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lorentz/geometry.hpp"
#include "lorentz/path.hpp"

namespace lorentz {

/// Occupation measure binned in 64 logarithmic shells between r/4 and 50.
class RadialHistogram {
public:
    static constexpr int kShells = 64;
    static constexpr double kOuter = 50.0;

    RadialHistogram() : RadialHistogram(0.01) {}
    explicit RadialHistogram(double r);

    double inner() const { return inner_; }
    double edge(int i) const;  ///< i = 0..kShells
    double shell_volume(int i) const;
    double shell_center(int i) const { return std::sqrt(edge(i) * edge(i + 1)); }
    int shell_of(double rho) const;  ///< -1 below, kShells above

    /// Point mass at x.
    void add_point(const Vec3& x, double weight = 1.0);
    /// Time spent by the segment a + s v, 0 <= s <= len, in each shell (exact).
    void add_segment(const Vec3& a, const UnitVec3& v, double len);
    void add_path(const PiecewisePath& path);
    /// One more independent trial in the normalisation.
    void add_trial() { ++trials_; }

    void merge(const RadialHistogram& o);

    double mass(int i) const { return mass_[static_cast<std::size_t>(i)]; }
    std::uint64_t hits(int i) const { return hits_[static_cast<std::size_t>(i)]; }
    double below() const { return below_; }
    double above() const { return above_; }
    double total_weight() const { return total_; }
    /// Occupation strictly inside the unit ball |x| < 1.
    double unit_ball_mass() const { return unit_ball_; }
    std::uint64_t trials() const { return trials_; }
    /// Mean occupation per unit volume in shell i.
    double density(int i) const;

private:
    double inner_;
    double log_ratio_;
    std::array<double, kShells> mass_{};
    std::array<std::uint64_t, kShells> hits_{};
    double below_ = 0.0;
    double above_ = 0.0;
    double total_ = 0.0;
    double unit_ball_ = 0.0;
    std::uint64_t trials_ = 0;
};

enum class EnvelopeKind {
    K_plus_L,  ///< C1 min(1, 1/|x|) + C2 exp(-c|x|) / |x|^2
    L,         ///< C exp(-c|x|) / |x|^2
    M,         ///< C exp(-c|x|)
};

struct EnvelopeFit {
    EnvelopeKind kind = EnvelopeKind::K_plus_L;
    double C1 = 0.0;
    double C2 = 0.0;
    double c = 0.0;
    std::vector<int> shells;      ///< shells used in the fit
    std::vector<double> ratio;    ///< density / envelope on those shells
    double max_min_ratio = 0.0;

    double envelope(double rho) const;
};

/// Least-squares fit of the log-ratio log(density / envelope) over `shells`.
EnvelopeFit fit_envelope(const RadialHistogram& h, EnvelopeKind kind, const std::vector<int>& shells);

/// Shells with at least `min_hits` samples and center in [lo, hi].
std::vector<int> usable_shells(const RadialHistogram& h, double lo, double hi, std::uint64_t min_hits);

/// Weighted log-log slope of shell density against shell center over `shells`.
struct SlopeEstimate {
    double slope = 0.0;
    double se = 0.0;
};
SlopeEstimate shell_density_slope(const RadialHistogram& h, const std::vector<int>& shells);

}  // namespace lorentz
