#pragma once

#include <cstdint>
#include <vector>

namespace exmeas {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's constants). Bijective on
// 64-bit words; the workhorse behind both key derivation and the streams.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Counter-based random stream: the i-th output is a hash of (key, i), so a
// stream is a pure function of its key and an advancing counter. Two streams
// with different keys are statistically independent for all practical
// purposes.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

    // Exact Poisson sampling: sequential inversion for mean <= 30, Hormann's
    // PTRD transformed rejection above (exact, not a normal approximation).
    std::int64_t next_poisson(double mean);

private:
    std::uint64_t state_;
};

// Hierarchical stream key. A key names a structural position in the
// simulation (root seed plus a path of (label, index) steps, e.g. "star
// process of vertex 17"). Distinct paths give independent streams; the same
// (seed, path) always gives the identical stream regardless of what else was
// sampled. Keying the edge variable by the unordered pair index makes
// U_{i,j} == U_{j,i} by construction.
class RngKey {
public:
    struct Step {
        std::uint32_t label;
        std::uint64_t index;
    };

    explicit RngKey(std::uint64_t seed) : seed_(seed) {}

    RngKey child(std::uint32_t label, std::uint64_t index = 0) const {
        RngKey k = *this;
        k.path_.push_back({label, index});
        return k;
    }

    // Collapse (seed, path) into a single stream key by a hash chain.
    std::uint64_t derive() const;

    RandomStream stream() const { return RandomStream(derive()); }

    std::uint64_t seed() const { return seed_; }
    const std::vector<Step>& path() const { return path_; }

private:
    std::uint64_t seed_;
    std::vector<Step> path_;
};

// Canonical encoding of the unordered pair {i, j} as a single index.
constexpr std::uint64_t unordered_pair_code(std::uint64_t i, std::uint64_t j) {
    std::uint64_t lo = i < j ? i : j;
    std::uint64_t hi = i < j ? j : i;
    return hi * (hi + 1) / 2 + lo;
}

}  // namespace exmeas
