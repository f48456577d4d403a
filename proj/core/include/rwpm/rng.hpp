#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace rwpm {

// splitmix64: the standard 64-bit finalizing mixer. Used only to derive
// independent stream seeds from (master seed, task index); the working
// generator is mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Counter-based stream derivation: the seed for task t depends only on
// (master, t), never on worker identity or scheduling, so results are
// independent of the worker count.
inline std::uint64_t task_seed(std::uint64_t master, std::uint64_t task_index) {
    return splitmix64(splitmix64(master) ^ splitmix64(task_index + 0x51ED2700A1B2C3D4ull));
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), eng_(seed) {}
    RngStream(std::uint64_t master, std::uint64_t task_index)
        : seed_(task_seed(master, task_index)), eng_(seed_) {}

    // The seed this stream was built from (identifies the stream, not its position).
    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits; deterministic across platforms.
    double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection to kill modulo bias; loop runs ~1.0 times for our small n.
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = eng_(); } while (v >= limit);
        return v % n;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::uint64_t seed_ = 0;
    std::mt19937_64 eng_;
};

// Inverse-CDF sampler over a fixed finite distribution. Explicit cumulative
// table + binary search: reproducible, unlike std::discrete_distribution.
class DiscreteSampler {
public:
    DiscreteSampler() = default;
    explicit DiscreteSampler(const std::vector<double>& weights) {
        if (weights.empty()) throw std::invalid_argument("DiscreteSampler: empty weights");
        cum_.reserve(weights.size());
        double acc = 0;
        for (double w : weights) {
            if (w < 0) throw std::invalid_argument("DiscreteSampler: negative weight");
            acc += w;
            cum_.push_back(acc);
        }
        if (acc <= 0) throw std::invalid_argument("DiscreteSampler: zero total mass");
        total_ = acc;
    }

    std::size_t sample(RngStream& rng) const {
        double u = rng.next_double() * total_;
        std::size_t lo = 0, hi = cum_.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (u < cum_[mid]) hi = mid; else lo = mid + 1;
        }
        return lo;
    }

    double total() const { return total_; }

private:
    std::vector<double> cum_;
    double total_ = 0;
};

}  // namespace rwpm
