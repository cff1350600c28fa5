#pragma once

#include <cstdint>
#include <string_view>

#include "salience/hashing.hpp"

namespace salience {

/// Counter-based generator: output k is mix64(key + k * golden). Streams with
/// different keys are independent, and the sequence is identical on every platform.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept {
        return mix64(key_ + (counter_++) * 0xD1B54A32D192ED03ULL);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n); n > 0. Rejection sampling keeps it unbiased.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Standard normal via Box-Muller (one draw per call, the pair's second half is discarded).
    double normal() noexcept;

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Derives the key for a named substream of the global seed, e.g. stream_key(seed, "reduce:5d").
constexpr std::uint64_t stream_key(std::uint64_t seed, std::string_view name) noexcept {
    return mix64(mix64(seed) ^ fnv1a64(name));
}

inline CounterRng make_stream(std::uint64_t seed, std::string_view name) noexcept {
    return CounterRng(stream_key(seed, name));
}

}  // namespace salience
