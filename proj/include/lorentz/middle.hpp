#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lorentz/geometry.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/stats.hpp"

namespace lorentz {

/// One sample of the three-flight middle segment: the particle arrives along
/// e = (1,0,0), is turned into u by ball A at the origin, flies xi, and is
/// turned into v by ball B. Â: ball B overlaps the incoming ray. Ã: the ray
/// leaving along v returns to ball A, after which the particle bounces
/// between A and B until it escapes.
struct MiddleOutcome {
    UnitVec3 u;
    UnitVec3 v;
    double xi = 0.0;
    double h = 0.0;  ///< xi / r

    bool in_A_hat = false;
    bool in_A_tilde = false;
    std::optional<double> sigma_hat;    ///< backward time at which the incoming ray enters ball B
    std::optional<double> sigma_tilde;  ///< time after xi at which the outgoing ray enters ball A
    double beta_tilde = 0.0;            ///< time of the last bounce, counted from xi
    UnitVec3 w_hat;
    UnitVec3 w_tilde;
    int nu = 2;  ///< collisions including the two at 0 and xi
    UnitVec3 n;  ///< normal of the plane (a, b), oriented so that e.n > 0

    bool defocusing_ok = true;    ///< w_j.n nondecreasing along the chain
    bool beta_bound_ok = true;    ///< beta_tilde / r <= h + 1 / |v.n|
    double beta_bound = 0.0;      ///< h + 1 / |v.n|
    bool degenerate = false;      ///< numerical failure in the billiard
};

/// Draws (u, xi, v) from UNI x EXP(1|1) x UNI and evaluates it.
MiddleOutcome middle_segment_sample(RngStream& rng, double r);

/// Evaluates a given (u, xi, v). r > 0 (r >= 0.5 is allowed here for the
/// dilated geometry with r = 1).
MiddleOutcome middle_segment_evaluate(const UnitVec3& u, double xi, const UnitVec3& v, double r,
                                      bool run_billiard = true);

/// Tail estimates on a grid of s values.
struct TailPoint {
    double s = 0.0;
    EstimateCI hat_angle;    ///< P(Â, angle(-e, ŵ) < s)
    EstimateCI tilde_angle;  ///< P(Ã, angle(-e, w̃) < s)
    EstimateCI beta;         ///< P(Ã, beta_tilde / r > s)
    double hat_envelope = 0.0;    ///< r min(s, 1)
    double tilde_envelope = 0.0;  ///< r min(s max(|log s|, 1), 1)
    double beta_envelope = 0.0;   ///< r min(max(|log s|, 1) / s, 1)
};

/// `outcomes` may hold only the samples that fell in Â or Ã; `total` is the
/// number of samples drawn.
std::vector<TailPoint> middle_tail_curves(std::span<const MiddleOutcome> outcomes, std::uint64_t total,
                                          std::span<const double> s_grid, double r);

struct LambdaEstimate {
    double h_max = 0.0;
    std::uint64_t samples = 0;
    double hat = 0.0;
    double hat_se = 0.0;
    double tilde = 0.0;
    double tilde_se = 0.0;
    double truncation_bound = 0.0;  ///< bound on the lambda-mass of either set beyond h_max
};

/// Bound on lambda({h > H} and the inclusion {sin angle < 2/h}) that contains both Â and Ã.
double lambda_truncation_bound(double H);

/// lambda(Â), lambda(Ã) at r = 1 by importance sampling h ~ UNI[0, h_max].
/// Also returns the same samples restricted to h <= H for each H in `sub_h`.
std::vector<LambdaEstimate> lambda_measure_estimate(std::uint64_t trials, double h_max, std::uint64_t seed,
                                                    std::span<const double> sub_h = {}, int workers = 1);

}  // namespace lorentz
