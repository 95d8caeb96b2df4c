#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "edgecache/error.hpp"

namespace edgecache {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent child seed for stream `stream` of a run seeded with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded random stream. Only the raw 64-bit output of mt19937_64 is used
/// (its sequence is fixed by the standard), so results are identical across
/// standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed)
        : engine_(seed)
    {
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    /// Number of failures before the first success, success probability p.
    std::uint64_t geometric(double p)
    {
        if (p >= 1.0)
            return 0;
        return static_cast<std::uint64_t>(std::floor(std::log1p(-uniform()) / std::log1p(-p)));
    }

    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

  private:
    std::mt19937_64 engine_;
};

/// Samples an index with probability proportional to a fixed weight vector.
class DiscreteSampler {
  public:
    DiscreteSampler() = default;

    explicit DiscreteSampler(std::span<const double> weights)
    {
        cumulative_.reserve(weights.size());
        double acc = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw UsageError("sampler weights must be finite and non-negative");
            acc += w;
            cumulative_.push_back(acc);
        }
        if (!(acc > 0.0))
            throw UsageError("sampler weights sum to zero");
    }

    std::size_t operator()(Rng& rng) const
    {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        auto idx = static_cast<std::size_t>(it - cumulative_.begin());
        return std::min(idx, cumulative_.size() - 1);
    }

    bool empty() const { return cumulative_.empty(); }
    std::size_t size() const { return cumulative_.size(); }
    double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  private:
    std::vector<double> cumulative_;
};

} // namespace edgecache
