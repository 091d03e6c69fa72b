#ifndef SCDT_RNG_HPP
#define SCDT_RNG_HPP

#include "scdt/core.hpp"

#include <cstdint>
#include <string_view>

namespace scdt {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: SplitMix64 run in counter mode.
///
/// Draw k of a stream is `mix(key + (k + 1) * 0x9e3779b97f4a7c15)`, so any draw
/// can be recomputed from (key, k) alone. Streams are keyed by
/// (seed, entity, purpose); adding an entity never shifts another entity's draws.
class CounterRng {
public:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static CounterRng stream(std::uint64_t seed, std::string_view entity, std::string_view purpose) noexcept;

    std::uint64_t key() const noexcept { return key_; }

    constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
        return splitmix64_mix(key_ + (counter + 1) * kGamma);
    }

    /// True with probability p (clamped to [0,1]): floor(u * den / 2^64) < num.
    bool bernoulli(const Rational& p, std::uint64_t counter) const noexcept;

    /// Uniform integer in [lo, hi]: lo + floor(u * (hi - lo + 1) / 2^64).
    std::int64_t uniform(std::int64_t lo, std::int64_t hi, std::uint64_t counter) const noexcept;

private:
    std::uint64_t key_;
};

} // namespace scdt

#endif // SCDT_RNG_HPP
