#include "lorentz/middle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lorentz/exploration.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/parallel.hpp"

namespace lorentz {

namespace {

constexpr double kChainTol = 1e-9;

/// First t >= 0 with |p + t d - c| < radius (0 if p is already inside).
std::optional<double> ray_entry(const Vec3& p, const UnitVec3& d, const Vec3& c, double radius)
{
    const Vec3 w = p - c;
    const double cterm = norm2(w) - radius * radius;
    if (cterm < 0.0) {
        return 0.0;
    }
    const double b = dot(w, d.vec());
    if (b >= 0.0) {
        return std::nullopt;
    }
    const double disc = b * b - cterm;
    if (disc <= 0.0) {
        return std::nullopt;
    }
    return cterm / (-b + std::sqrt(disc));
}

}  // namespace

MiddleOutcome middle_segment_evaluate(const UnitVec3& u, double xi, const UnitVec3& v, double r, bool run_billiard)
{
    const UnitVec3& e = kE1;
    MiddleOutcome out;
    out.u = u;
    out.v = v;
    out.xi = xi;
    out.h = xi / r;
    out.w_hat = u;
    out.w_tilde = v;

    const Vec3 dir_a = UnitVec3::normalized(e.vec() - u.vec()).vec();
    const Vec3 dir_b = UnitVec3::normalized(u.vec() - v.vec()).vec();
    const Vec3 center_a = r * dir_a;
    const Vec3 start = xi * u.vec();
    const Vec3 center_b = start + r * dir_b;

    out.sigma_hat = ray_entry(Vec3{}, -e, center_b, r);
    out.sigma_tilde = ray_entry(start, v, center_a, r);
    out.in_A_hat = out.sigma_hat.has_value();
    out.in_A_tilde = out.sigma_tilde.has_value();

    const Vec3 b = out.h * u.vec() + dir_b;
    UnitVec3 n = UnitVec3::normalized(cross(dir_a, b));
    if (dot(e.vec(), n.vec()) < 0.0) {
        n = -n;
    }
    out.n = n;

    if (!out.in_A_tilde || !run_billiard) {
        return out;
    }

    const double vn = std::abs(dot(v.vec(), n.vec()));
    out.beta_bound = out.h + 1.0 / vn;

    std::vector<UnitVec3> chain{e, u, v};
    Vec3 p = start;
    UnitVec3 w = v;
    double t = 0.0;
    bool toward_a = true;
    try {
        for (std::uint64_t k = 0;; ++k) {
            if (k > kSubCollisionBudget) {
                throw BudgetExhausted("middle-segment billiard exceeded the collision budget");
            }
            const auto hit = first_sphere_hit(p, w, toward_a ? center_a : center_b, r,
                                              std::numeric_limits<double>::infinity());
            if (!hit) {
                break;
            }
            t += hit->t;
            p += hit->t * w.vec();
            w = reflect(w, hit->normal);
            chain.push_back(w);
            out.beta_tilde = t;
            ++out.nu;
            toward_a = !toward_a;
        }
    } catch (const DegenerateGeometry&) {
        out.degenerate = true;
    }
    if (out.nu == 2) {
        out.degenerate = true;  // the entry test and the hit finder disagree (grazing)
    }
    out.w_tilde = w;

    double prev = dot(chain.front().vec(), n.vec());
    out.defocusing_ok = prev >= -kChainTol;
    for (std::size_t j = 1; j < chain.size(); ++j) {
        const double cur = dot(chain[j].vec(), n.vec());
        if (cur < prev - kChainTol) {
            out.defocusing_ok = false;
        }
        prev = cur;
    }
    out.beta_bound_ok = out.beta_tilde / r <= out.beta_bound * (1.0 + kChainTol);
    return out;
}

MiddleOutcome middle_segment_sample(RngStream& rng, double r)
{
    if (!(r > 0.0 && r < 0.5)) {
        throw std::invalid_argument("middle_segment_sample requires 0 < r < 0.5");
    }
    const UnitVec3 u = sample_direction(rng);
    const double xi = sample_flight_time(rng, FlightCondition::short_flight);
    const UnitVec3 v = sample_direction(rng);
    return middle_segment_evaluate(u, xi, v, r);
}

std::vector<TailPoint> middle_tail_curves(std::span<const MiddleOutcome> outcomes, std::uint64_t total,
                                          std::span<const double> s_grid, double r)
{
    const UnitVec3 back = -kE1;
    std::vector<TailPoint> out;
    out.reserve(s_grid.size());
    for (double s : s_grid) {
        std::uint64_t hat = 0;
        std::uint64_t tilde = 0;
        std::uint64_t beta = 0;
        for (const auto& o : outcomes) {
            if (o.in_A_hat && angle(back, o.w_hat) < s) {
                ++hat;
            }
            if (o.in_A_tilde && !o.degenerate) {
                if (angle(back, o.w_tilde) < s) {
                    ++tilde;
                }
                if (o.beta_tilde / r > s) {
                    ++beta;
                }
            }
        }
        TailPoint tp;
        tp.s = s;
        tp.hat_angle = wilson_ci(hat, total);
        tp.tilde_angle = wilson_ci(tilde, total);
        tp.beta = wilson_ci(beta, total);
        const double lg = std::max(std::abs(std::log(s)), 1.0);
        tp.hat_envelope = r * std::min(s, 1.0);
        tp.tilde_envelope = r * std::min(s * lg, 1.0);
        tp.beta_envelope = r * std::min(lg / s, 1.0);
        out.push_back(tp);
    }
    return out;
}

double lambda_truncation_bound(double H)
{
    if (H <= 2.0) {
        return std::numeric_limits<double>::infinity();
    }
    // integral over h > H of P(sin angle < 2/h within a hemisphere) = (1 - sqrt(1 - 4/h^2)) / 2;
    // with x = 2/h the antiderivative is asin(x) - (1 - sqrt(1 - x^2)) / x
    const double x = 2.0 / H;
    return std::asin(x) - (1.0 - std::sqrt(1.0 - x * x)) / x;
}

namespace {

struct LambdaTally {
    std::vector<std::uint64_t> hat;
    std::vector<std::uint64_t> tilde;
    void merge(const LambdaTally& o)
    {
        if (hat.empty()) {
            *this = o;
            return;
        }
        for (std::size_t i = 0; i < hat.size(); ++i) {
            hat[i] += o.hat[i];
            tilde[i] += o.tilde[i];
        }
    }
};

}  // namespace

std::vector<LambdaEstimate> lambda_measure_estimate(std::uint64_t trials, double h_max, std::uint64_t seed,
                                                    std::span<const double> sub_h, int workers)
{
    if (trials == 0) {
        throw std::invalid_argument("lambda_measure_estimate: zero trials");
    }
    std::vector<double> levels{h_max};
    for (double H : sub_h) {
        if (H < h_max) {
            levels.push_back(H);
        }
    }
    auto tally = run_trials<LambdaTally>(trials, workers, [&](std::uint64_t k, LambdaTally& t) {
        if (t.hat.empty()) {
            t.hat.assign(levels.size(), 0);
            t.tilde.assign(levels.size(), 0);
        }
        RngStream rng(seed, k);
        const UnitVec3 u = sample_direction(rng);
        const double h = h_max * rng.uniform();
        const UnitVec3 v = sample_direction(rng);
        if (!(h > 0.0)) {
            return;
        }
        const MiddleOutcome o = middle_segment_evaluate(u, h, v, 1.0, false);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (h <= levels[i]) {
                t.hat[i] += o.in_A_hat ? 1 : 0;
                t.tilde[i] += o.in_A_tilde ? 1 : 0;
            }
        }
    });
    std::vector<LambdaEstimate> out;
    const double n = static_cast<double>(trials);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        LambdaEstimate le;
        le.h_max = levels[i];
        le.samples = trials;
        const double ph = static_cast<double>(tally.hat.empty() ? 0 : tally.hat[i]) / n;
        const double pt = static_cast<double>(tally.tilde.empty() ? 0 : tally.tilde[i]) / n;
        le.hat = h_max * ph;
        le.tilde = h_max * pt;
        le.hat_se = h_max * std::sqrt(ph * (1.0 - ph) / n);
        le.tilde_se = h_max * std::sqrt(pt * (1.0 - pt) / n);
        le.truncation_bound = lambda_truncation_bound(levels[i]);
        out.push_back(le);
    }
    return out;
}

}  // namespace lorentz
