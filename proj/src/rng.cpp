#include "scdt/rng.hpp"

namespace scdt {

CounterRng CounterRng::stream(std::uint64_t seed, std::string_view entity, std::string_view purpose) noexcept {
    const std::uint64_t e = fnv1a64(entity);
    const std::uint64_t p = fnv1a64(purpose);
    return CounterRng(splitmix64_mix(splitmix64_mix(seed ^ e) ^ p));
}

bool CounterRng::bernoulli(const Rational& p, std::uint64_t counter) const noexcept {
    if (p <= 0) return false;
    if (p >= 1) return true;
    using u128 = unsigned __int128;
    const u128 scaled = (static_cast<u128>(at(counter)) * static_cast<u128>(p.denominator())) >> 64;
    return scaled < static_cast<u128>(p.numerator());
}

std::int64_t CounterRng::uniform(std::int64_t lo, std::int64_t hi, std::uint64_t counter) const noexcept {
    if (hi <= lo) return lo;
    using u128 = unsigned __int128;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    const u128 scaled = (static_cast<u128>(at(counter)) * span) >> 64;
    return lo + static_cast<std::int64_t>(scaled);
}

} // namespace scdt
