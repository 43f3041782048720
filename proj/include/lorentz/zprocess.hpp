#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lorentz/exploration.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/path.hpp"

namespace lorentz {

struct EtaBits {
    bool hat = false;
    bool tilde = false;
};

struct EtaRecord {
    int j = 0;
    bool eta_hat = false;
    bool eta_tilde = false;
    bool eta = false;
    bool eta_hat_prime = false;
    bool eta_tilde_prime = false;
};

/// Shadowing / direct-recollision indicators from the increments
/// y_{j-2}, y_{j-1}, y_j (all nonzero).
EtaBits eta_indicators(const Vec3& y_prev2, const Vec3& y_prev, const Vec3& y_cur, double r);

/// Same, from flight data. xi_prev2 may be 0 (no history before time 0).
EtaBits eta_indicators(double xi_prev2, const UnitVec3& u_prev2, double xi_prev, const UnitVec3& u_prev,
                       double xi_cur, const UnitVec3& u_cur, double r);

/// Angle-only dominating indicators.
EtaBits eta_prime_indicators(double xi_prev, const UnitVec3& u_prev2, const UnitVec3& u_prev, const UnitVec3& u_cur,
                             double r);

/// How the first two indicators of a run are treated.
enum class EtaHistory {
    stream,  ///< full stream from time 0: eta_1 = 0, eta_2 uses xi_0 = 0
    leg,     ///< pack leg: eta_1 = eta_2 = 0 (previous flights are long)
};

struct ZDiagnostics {
    std::uint64_t convention_discrepancies = 0;  ///< indicator and two-ball dynamics disagree
    std::uint64_t neighbouring_eta = 0;          ///< eta_j = eta_{j+1} = 1
    std::uint64_t sub_collisions = 0;
    std::uint64_t degenerate = 0;
};

struct ZResult {
    PiecewisePath path;
    std::vector<EtaRecord> eta;  ///< eta[j-1] belongs to flight j
    ZDiagnostics diag;
    /// Positions Z(tau_n), n = 0..N.
    std::vector<Vec3> nodes;
};

struct ZOptions {
    EtaHistory history = EtaHistory::stream;
    /// When set, the rules are applied on this flight only and Y increments elsewhere.
    std::optional<std::size_t> rules_only_at;
    std::optional<UnitVec3> u_after;
};

ZResult build_Z_flights(const UnitVec3& u_in, std::span<const Flight> flights, double r, double t_max,
                        const ZOptions& opts = {});
ZResult build_Z(const FlightStream& fs, double r, double t_max);

/// Z^(k): Y increments outside flight k, Z rules on flight k.
PiecewisePath build_Z_k(const FlightStream& fs, std::size_t k, double r);

struct Pack {
    int gamma = 0;
    std::vector<Flight> flights;

    double theta() const;
    bool operator==(const Pack& o) const;
};

/// Cuts the stream into packs at the stopping times
/// Gamma_n = min{ j >= Gamma_{n-1} + 2 : min(xi_{j-1}, xi_j, xi_{j+1}, xi_{j+2}) > 1 }.
/// Requires xi_1, xi_2 > 1; stops when the look-ahead runs past the stream.
std::vector<Pack> cut_packs(const FlightStream& fs);

/// Pack cutting on a lazily extended stream.
class PackSource {
public:
    /// Draws u_0, then the first two flights from EXP(1|0), then plain flights on demand.
    explicit PackSource(RngStream& rng);

    Pack next();
    const FlightStream& stream() const { return fs_; }
    /// Number of flights already assigned to packs (Gamma of the last pack).
    std::size_t consumed() const { return start_; }

private:
    RngStream& rng_;
    FlightStream fs_;
    std::size_t start_ = 0;
};

bool pack_invariants_hold(const Pack& p, double next_xi1, double next_xi2);

Pack reverse_pack(const Pack& p);

/// Forward leg Z from a pack (incoming/outgoing velocities only enter the
/// scatterer bookkeeping, not the path).
ZResult build_leg_Z_result(const Pack& p, double r, const std::optional<UnitVec3>& u_in = std::nullopt,
                           const std::optional<UnitVec3>& u_out = std::nullopt);
PiecewisePath build_leg_Z(const Pack& p, double r);
/// Z*(t, p) = Z(theta - t, p*) - Zbar(p*).
PiecewisePath build_leg_Z_star(const Pack& p, double r);

struct LegTriple {
    double theta = 0.0;
    PiecewisePath Y;
    PiecewisePath Z;
    PiecewisePath X;
    UnitVec3 u_in;
    UnitVec3 u_out;
    UnitVec3 x_out;  ///< exploration velocity at theta^+
    bool mismatch = false;
    std::optional<double> first_mismatch;  ///< first time X and Z separate
    std::vector<EtaRecord> eta;
    ZDiagnostics zdiag;
};

LegTriple build_leg_X(const Pack& p, const UnitVec3& u_in, const UnitVec3& u_out, double r);

/// Legs concatenated in space and time.
struct MultiLeg {
    std::vector<Pack> packs;
    std::vector<double> leg_end;      ///< Theta_n
    std::vector<std::size_t> gamma_end;  ///< Gamma_n
    PiecewisePath Y;
    PiecewisePath Z;
    PiecewisePath X;  ///< per-leg explorations with carried incoming velocity
    std::vector<bool> leg_mismatch;
};

MultiLeg concatenate_legs(const FlightStream& fs, const std::vector<Pack>& packs, double r);

struct InterlegEvents {
    bool w_hat = false;
    bool w_tilde = false;
};

/// Forward detection of shadowing of leg j by the past path (w_hat) and of
/// bumps of leg j into earlier scatterers (w_tilde), j = 1..legs, on a path
/// whose leg boundaries are `leg_end`.
std::vector<InterlegEvents> interleg_events(const PiecewisePath& path, const std::vector<double>& leg_end, double r);

}  // namespace lorentz
