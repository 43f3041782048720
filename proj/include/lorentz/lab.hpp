#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lorentz/flight.hpp"
#include "lorentz/histogram.hpp"
#include "lorentz/path.hpp"
#include "lorentz/stats.hpp"
#include "lorentz/zprocess.hpp"

namespace lorentz {

/// Events whose frequency the lab estimates. The unit that counts as one
/// trial depends on the kind:
///   eta, eta_pair            one flight index j >= 3 of a stream
///   W_hat, W_tilde           one stream, flight j = params.j treated as a leg of Y
///   interleg, interleg_hat   one leg j >= 2 of a concatenated Z process
///   W_hat_star               one forward leg against an independent backward past
///   leg_mismatch             one leg (exploration vs Z on a pack)
///   first_mismatch_before_T  one stream run to time params.T
enum class EstimatorKind {
    eta,
    eta_pair,
    W_hat,
    W_tilde,
    interleg,
    interleg_hat,
    W_hat_star,
    leg_mismatch,
    first_mismatch_before_T,
};

const char* to_string(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator_kind(const std::string& name);

struct EventParams {
    std::size_t stream_flights = 1024;  ///< eta kinds
    std::size_t j = 10;                 ///< W_hat, W_tilde: flight index; W_hat_star: leg index
    std::size_t legs = 16;              ///< legs per stream for interleg / leg_mismatch
    double T = 20.0;                    ///< first_mismatch_before_T
    int workers = 1;
};

struct EventEstimate {
    EstimateCI ci;
    std::uint64_t aborted = 0;  ///< units dropped after a numeric guard fired
    /// eta kinds: flights where the exact indicator fired but the angle-only one did not.
    std::uint64_t prime_violations_hat = 0;
    std::uint64_t prime_violations_tilde = 0;
};

/// Frequency of `kind` over at least `trials` units (rounded up to whole streams).
/// Deterministic given (kind, r, trials, seed, params) and independent of workers.
EventEstimate estimate_event_probability(EstimatorKind kind, double r, std::uint64_t trials, std::uint64_t seed,
                                         const EventParams& params = {});

/// Y on flights 1..j with incoming u_0 and outgoing u_{j+1}: each flight is
/// treated as a leg, so the inter-leg events of flight j are the shadowing and
/// bumping of Y against its own past.
InterlegEvents y_flight_events(const FlightStream& fs, std::size_t j, double r);

/// Forward Z process of concatenated legs from the first `packs.size()` packs of
/// a stream, with Y's velocity u_{Gamma+1} after the last leg.
struct ConcatenatedZ {
    PiecewisePath path;
    std::vector<double> leg_end;
};
ConcatenatedZ concatenate_Z_legs(const UnitVec3& u0, const std::vector<Pack>& packs, const UnitVec3& u_after,
                                 double r);

/// Backward process Z* of concatenated legs Z*(., p_n) starting at the origin.
PiecewisePath concatenate_Z_star_legs(const std::vector<Pack>& packs, double r);

enum class OccupationProcess {
    Y_first_step,      ///< Y_1
    Y_steps,           ///< Y_k, k >= 1
    Y_later_steps,     ///< Y_k, k >= 2
    Y_path,            ///< Y(t), t > 0
    Zleg_steps,        ///< Z_k, 1 <= k <= gamma, one forward leg
    Zleg_path,         ///< Z(t), one forward leg
    Zstar_first_step,  ///< Z*_1 of one backward leg
    Zstar_steps,       ///< Z*_k, 1 <= k <= gamma, one backward leg
    Zstar_path,        ///< Z*(t), one backward leg
    Zstar_all_steps,   ///< Z*_k, k >= 1, concatenated backward legs
    Zstar_all_path,    ///< Z*(t), concatenated backward legs
    Xi_star_walk,      ///< the walk of backward leg displacements
};

const char* to_string(OccupationProcess p);
std::optional<OccupationProcess> parse_occupation_process(const std::string& name);

struct OccupationOptions {
    double horizon = 200.0;  ///< processes without a natural end are cut at this time
    int workers = 1;
};

struct OccupationResult {
    RadialHistogram hist;
    std::uint64_t aborted = 0;
    /// Occupation lost to the horizon cut, bounded using the exponential tail of leg durations.
    double truncation_bound = 0.0;
};

OccupationResult occupation_histogram(OccupationProcess process, double r, std::uint64_t trials, std::uint64_t seed,
                                      const OccupationOptions& opts = {});

struct ScalingReport {
    double r = 0.0;
    double T = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t aborted = 0;
    std::vector<std::string> warnings;

    std::vector<double> sup_dev;  ///< sup_t |X - Y| / sqrt(T), one per trial
    double sup_q50 = 0.0;
    double sup_q90 = 0.0;
    double sup_q95 = 0.0;
    double sup_q99 = 0.0;
    std::vector<double> sup_dev_Z;  ///< sup_t |X - Z| / sqrt(T), one per trial
    double sup_Z_q95 = 0.0;
    double mismatch_fraction = 0.0;  ///< trials with a recorded mismatch before T

    std::array<double, 3> var_X{};
    std::array<double, 3> var_Y{};
    std::array<std::array<double, 3>, 3> cov_X{};
    std::array<double, 3> ks_p_X{};
    std::array<double, 3> ks_p_Y{};

    std::vector<double> msd_t;
    std::vector<double> msd_X;
    std::vector<double> msd_Y;
};

/// X against Y over [0, T]. Every trial runs the exploration from a fresh stream.
ScalingReport scaling_diagnostics(double r, double T, std::uint64_t trials, std::uint64_t seed, int workers = 1);

/// Per-coordinate variance of Y(T)/sqrt(T) from Y-only trials.
std::array<double, 3> y_endpoint_variance(double T, std::uint64_t trials, std::uint64_t seed, int workers = 1);

/// Exact per-coordinate variance of Y(T)/sqrt(T): (2T - 2(1 - e^-T)) / (3T).
double green_kubo_variance(double T);

}  // namespace lorentz
