#pragma once

// Deterministic sample points and the per-point parallel map used by every
// check. Results are always returned in point order, so reports do not depend
// on the thread count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "affinor/linalg.hpp"

namespace affinor {

inline constexpr std::uint64_t kDefaultSeed = 24245;  // 0x5EED
inline constexpr int kDefaultPoints = 50;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Interval&) const = default;
};

using Domain = std::vector<Interval>;

inline bool contains(const Domain& d, const Vec& x) {
    if (static_cast<Eigen::Index>(d.size()) != x.size()) return false;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (x[static_cast<Eigen::Index>(i)] < d[i].lo || x[static_cast<Eigen::Index>(i)] > d[i].hi) return false;
    return true;
}

/// `count` points drawn uniformly from the box `domain`. The mapping from
/// engine bits to doubles is done by hand so the sequence is identical on
/// every standard library.
inline std::vector<Vec> sample_points(const Domain& domain, int count, std::uint64_t seed = kDefaultSeed) {
    std::mt19937_64 engine(seed);
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) {
        Vec x(static_cast<Eigen::Index>(domain.size()));
        for (std::size_t i = 0; i < domain.size(); ++i) {
            const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
            x[static_cast<Eigen::Index>(i)] = domain[i].lo + unit * (domain[i].hi - domain[i].lo);
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// Thread count from AFFINOR_THREADS (0 or unset = hardware concurrency).
inline unsigned worker_count() {
    unsigned n = 0;
    if (const char* env = std::getenv("AFFINOR_THREADS")) {
        try {
            n = static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
            n = 0;
        }
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Applies `fn` to every index in [0, count) and returns results in index
/// order. The first exception thrown (by index) is rethrown.
template <class R>
std::vector<R> parallel_map(std::size_t count, const std::function<R(std::size_t)>& fn) {
    std::vector<R> results(count);
    std::vector<std::exception_ptr> errors(count);
    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        results[i] = fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace affinor
