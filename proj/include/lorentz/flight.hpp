#pragma once

#include <vector>

#include "lorentz/geometry.hpp"
#include "lorentz/path.hpp"
#include "lorentz/rng.hpp"

namespace lorentz {

/// Conditioning of a flight time on its signature bit.
enum class FlightCondition {
    none,
    short_flight,  ///< eps = 1, xi < 1
    long_flight,   ///< eps = 0, xi >= 1
};

struct Flight {
    double xi = 1.0;
    UnitVec3 u;
    bool eps = false;

    static Flight make(double xi, const UnitVec3& u) { return {xi, u, xi < 1.0}; }
};

/// Ingredients (u_0; (xi_j, u_j), j >= 1). flights[j-1] holds flight j.
struct FlightStream {
    UnitVec3 u0;
    std::vector<Flight> flights;

    std::size_t size() const { return flights.size(); }
    const Flight& flight(std::size_t j) const { return flights.at(j - 1); }
    /// Direction u_j for j >= 0.
    const UnitVec3& u(std::size_t j) const { return j == 0 ? u0 : flights.at(j - 1).u; }
    /// tau_n = xi_1 + ... + xi_n.
    double tau(std::size_t n) const;
    /// Total duration tau_last.
    double duration() const { return tau(flights.size()); }
    /// Number of completed flights by time t (nu_t).
    std::size_t nu(double t) const;
};

double sample_flight_time(RngStream& rng, FlightCondition cond = FlightCondition::none);
/// Uniform on the sphere; consumes exactly two draws.
UnitVec3 sample_direction(RngStream& rng);
Flight sample_flight(RngStream& rng, FlightCondition cond = FlightCondition::none);

/// Draws u_0, then (xi, u) per flight until tau_last >= horizon.
FlightStream generate_flight_stream(RngStream& rng, double horizon);
/// As above, with the first `conditioned` flight times drawn from EXP(1|0).
FlightStream generate_flight_stream(RngStream& rng, double horizon, int conditioned_long);

/// Appends flights drawn from rng (same draw order) until at least `count` flights exist.
void extend_flight_stream(FlightStream& fs, RngStream& rng, std::size_t count);

/// Y(t) = Y_{nu_t} + {t} u_{nu_t + 1}, with incoming velocity u_0.
PiecewisePath build_Y(const FlightStream& fs);

/// Y'_k = Y_k + r (u_k - u_{k+1}) / |u_k - u_{k+1}| for k = 0 .. size-1.
std::vector<Vec3> virtual_scatterers(const FlightStream& fs, double r);

}  // namespace lorentz
