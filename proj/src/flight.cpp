#include "lorentz/flight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lorentz {

double FlightStream::tau(std::size_t n) const
{
    double t = 0.0;
    for (std::size_t j = 0; j < n && j < flights.size(); ++j) {
        t += flights[j].xi;
    }
    return t;
}

std::size_t FlightStream::nu(double t) const
{
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& f : flights) {
        acc += f.xi;
        if (acc > t) {
            break;
        }
        ++n;
    }
    return n;
}

double sample_flight_time(RngStream& rng, FlightCondition cond)
{
    static const double kOneMinusInvE = 1.0 - std::exp(-1.0);
    const double u = rng.uniform();
    switch (cond) {
    case FlightCondition::short_flight:
        return -std::log1p(-u * kOneMinusInvE);
    case FlightCondition::long_flight:
        return 1.0 - std::log1p(-u);
    case FlightCondition::none:
    default:
        break;
    }
    double x = -std::log1p(-u);
    if (!(x > 0.0)) {
        x = std::numeric_limits<double>::min();  // u == 0 has probability 2^-53
    }
    return x;
}

UnitVec3 sample_direction(RngStream& rng)
{
    const double cos_theta = 1.0 - 2.0 * rng.uniform();
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    return UnitVec3::normalized({sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta});
}

Flight sample_flight(RngStream& rng, FlightCondition cond)
{
    const double xi = sample_flight_time(rng, cond);
    const UnitVec3 u = sample_direction(rng);
    return Flight::make(xi, u);
}

FlightStream generate_flight_stream(RngStream& rng, double horizon)
{
    return generate_flight_stream(rng, horizon, 0);
}

FlightStream generate_flight_stream(RngStream& rng, double horizon, int conditioned_long)
{
    FlightStream fs;
    fs.u0 = sample_direction(rng);
    double t = 0.0;
    do {
        const auto cond = static_cast<int>(fs.flights.size()) < conditioned_long ? FlightCondition::long_flight
                                                                                 : FlightCondition::none;
        fs.flights.push_back(sample_flight(rng, cond));
        t += fs.flights.back().xi;
    } while (t < horizon || static_cast<int>(fs.flights.size()) < conditioned_long);
    return fs;
}

void extend_flight_stream(FlightStream& fs, RngStream& rng, std::size_t count)
{
    while (fs.flights.size() < count) {
        fs.flights.push_back(sample_flight(rng));
    }
}

PiecewisePath build_Y(const FlightStream& fs)
{
    PiecewisePath y;
    y.incoming = fs.u0;
    for (const auto& f : fs.flights) {
        y.extend(f.u, f.xi);
    }
    return y;
}

std::vector<Vec3> virtual_scatterers(const FlightStream& fs, double r)
{
    std::vector<Vec3> out;
    out.reserve(fs.flights.size());
    Vec3 pos;
    for (std::size_t k = 0; k < fs.flights.size(); ++k) {
        if (k > 0) {
            pos += fs.flights[k - 1].xi * fs.flights[k - 1].u.vec();
        }
        out.push_back(scatterer_center(pos, fs.u(k), fs.u(k + 1), r));
    }
    return out;
}

}  // namespace lorentz
