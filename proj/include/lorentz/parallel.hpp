#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

#include "lorentz/rng.hpp"

namespace lorentz {

/// Seed for a named sub-experiment, so different estimators never share streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
{
    return splitmix64(seed ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t kTrialBlock = 512;

/// Runs `trials` trials in fixed blocks of kTrialBlock and folds the per-block
/// tallies in block order. Trial k always draws from stream id k and blocks are
/// merged in index order, so the result does not depend on `workers`.
///
/// Tally needs default construction and `merge(const Tally&)`;
/// fn(trial_index, tally) runs one trial.
template <class Tally, class Fn>
Tally run_trials(std::uint64_t trials, int workers, Fn&& fn)
{
    const std::uint64_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
    std::vector<std::optional<Tally>> partial(blocks);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto work = [&]() {
        while (!failed.load()) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= blocks) {
                return;
            }
            try {
                Tally t;
                const std::uint64_t lo = b * kTrialBlock;
                const std::uint64_t hi = std::min(trials, lo + kTrialBlock);
                for (std::uint64_t k = lo; k < hi; ++k) {
                    fn(k, t);
                }
                partial[b].emplace(std::move(t));
            } catch (...) {
                if (!failed.exchange(true)) {
                    failure = std::current_exception();
                }
                return;
            }
        }
    };

    const int n = std::max(1, workers);
    if (n == 1 || blocks <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    Tally total;
    for (auto& p : partial) {
        total.merge(*p);
    }
    return total;
}

/// Default worker count: LORENTZ_LAB_THREADS, else hardware concurrency.
int default_workers();

}  // namespace lorentz
