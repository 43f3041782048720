#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "lorentz/flight.hpp"
#include "lorentz/geometry.hpp"
#include "lorentz/path.hpp"
#include "lorentz/spatial_grid.hpp"

namespace lorentz {

/// A discovered scatterer. A shadowed scattering leaves a STAR entry, which
/// behaves as a point at infinity and is never indexed.
struct Scatterer {
    std::optional<Vec3> center;
    int birth_index = 0;  ///< flight index n of the scattering that created it
    double birth_time = 0.0;

    bool is_star() const { return !center.has_value(); }
};

class ScattererSet {
public:
    explicit ScattererSet(double r) : r_(r), grid_(std::max(1.0, 4.0 * r)) {}

    double radius() const { return r_; }
    const std::vector<Scatterer>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    std::size_t real_count() const { return real_; }
    const SpatialGrid& grid() const { return grid_; }

    int add(const Vec3& center, int birth_index, double birth_time);
    int add_star(int birth_index, double birth_time);
    void clear();

private:
    double r_;
    SpatialGrid grid_;
    std::vector<Scatterer> items_;
    std::size_t real_ = 0;
};

enum class EventKind { recollision, shadowed_scattering, fresh_scattering };

const char* to_string(EventKind kind);

struct Event {
    EventKind kind;
    double t = 0.0;
    int flight_index = 0;
    int scatterer = -1;  ///< id in the ScattererSet (STAR ids for shadowed events)
};

struct EventLog {
    std::vector<Event> records;

    std::size_t count(EventKind kind) const;
    void merge(const EventLog& other);
};

/// Thrown when a single flight interval exceeds the sub-collision budget.
class BudgetExhausted : public std::runtime_error {
public:
    explicit BudgetExhausted(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::uint64_t kSubCollisionBudget = 1'000'000;

struct ExplorationResult {
    PiecewisePath path;
    ScattererSet scatterers{0.1};
    EventLog events;
    std::optional<double> first_mismatch;
    /// Velocity after the final scattering decision (the leg's theta^+ velocity).
    UnitVec3 outgoing;
    HitDiagnostics diagnostics;
};

/// Optional hooks for the exploration kernel.
struct ExploreOptions {
    /// Velocity u_{N+1} used for the scattering decision at the end of the last
    /// flight; without it the run stops at the end of the last flight.
    std::optional<UnitVec3> u_after;
    Vec3 origin{};
    double t0 = 0.0;
};

/// Runs Steps 1-3 on incoming velocity u_in and flights (xi_n, u_n), n = 1..N,
/// up to time t_max (relative to t0).
ExplorationResult explore_flights(const UnitVec3& u_in, std::span<const Flight> flights, double r, double t_max,
                                  const ExploreOptions& opts = {});

/// Lorentz exploration process coupled to the Markovian flight stream.
ExplorationResult explore(const FlightStream& fs, double r, double t_max);

/// X''_n = Xn + r (v_in - u_out) / |v_in - u_out|.
Vec3 candidate_center(const Vec3& xn, const UnitVec3& v_in, const UnitVec3& u_out, double r);

struct ShadowReport {
    bool shadowed = false;
    double d = 0.0;
};

/// d = distance from the candidate to the whole past path, capped at r.
ShadowReport shadow_test(const PiecewisePath& past, const Vec3& candidate, double r);

struct ConsistencyReport {
    bool ok = true;
    double worst_violation = 0.0;  ///< max(0, r - min distance)
};

/// Checks min over (t, j) of |path(t) - center_j| >= r(1 - 1e-9).
ConsistencyReport check_r_consistent(const PiecewisePath& path, std::span<const Vec3> centers, double r);
ConsistencyReport check_r_consistent(const PiecewisePath& path, double r);

/// Cross-distances between each path and the other's implied scatterers.
/// Throws std::invalid_argument if the time supports overlap.
bool check_r_compatible(const PiecewisePath& a, const PiecewisePath& b, double r);

/// Minimum distance from a set of points to a path, using a segment grid.
double min_distance_points_to_path(const PiecewisePath& path, std::span<const Vec3> points, double cutoff);

/// Lazily sampled Poisson field of ball centers of intensity rho on unit cells.
/// Cell contents are a pure function of (seed, cell), so the field is the same
/// as one pre-sampled on any box containing the visited region.
class PoissonField {
public:
    PoissonField(double r, double rho, std::uint64_t seed);

    /// Intensity (pi r^2)^-1, the one that makes free flights Exp(1).
    static double unit_mean_free_path_density(double r);

    double radius() const { return r_; }
    double density() const { return rho_; }
    std::uint64_t seed() const { return seed_; }
    /// Number of origin-covered fields rejected before this one.
    int rejections() const { return rejections_; }

    /// Centers inside unit cell (i, j, k).
    const std::vector<Vec3>& cell(std::int64_t i, std::int64_t j, std::int64_t k);
    /// All centers in cells overlapping the box.
    void collect(const Vec3& lo, const Vec3& hi, std::vector<Vec3>& out);

private:
    bool origin_covered();

    double r_;
    double rho_;
    std::uint64_t base_seed_;
    std::uint64_t seed_;
    int rejections_ = 0;
    std::unordered_map<std::uint64_t, std::vector<Vec3>> cells_;
};

struct DirectRun {
    PiecewisePath path;
    std::vector<double> collision_times;
};

/// Billiard in a fixed list of centers, starting at 0 with velocity u0.
DirectRun direct_field_simulate(std::span<const Vec3> field, double r, const UnitVec3& u0, double t_max);
/// Billiard in a lazily sampled Poisson field.
DirectRun direct_field_simulate(PoissonField& field, const UnitVec3& u0, double t_max);

/// Poisson(mean) variate by inversion, exact for any mean (split into chunks).
std::uint64_t sample_poisson(RngStream& rng, double mean);

}  // namespace lorentz
