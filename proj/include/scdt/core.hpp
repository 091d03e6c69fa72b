#ifndef SCDT_CORE_HPP
#define SCDT_CORE_HPP

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scdt {

/// Simulation time in abstract integer ticks.
using Tick = std::int64_t;

/// Exact arithmetic for every stored metric, cost, rate and factor.
using Rational = boost::rational<std::int64_t>;

/// Which exit-status class an error maps to at the command line.
enum class ErrorKind { Domain, Io, Parse };

/// Base error. `code()` is module-qualified, e.g. "topology.UnknownReference".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message)
      , kind_(kind)
      , code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

/// Always "p/q", even for integers ("3/1").
std::string format_fraction(const Rational& value);

/// Accepts "3", "-2", "3/4" and finite decimals such as "1.25".
Rational parse_rational(std::string_view text);

/// ceil for non-negative rationals.
std::int64_t ceil_nonneg(const Rational& value);

/// Ordering for codes like "sD1.2" < "sD1.12": digit runs compare numerically.
bool natural_less(std::string_view lhs, std::string_view rhs);

struct NaturalLess {
    using is_transparent = void;
    bool operator()(std::string_view lhs, std::string_view rhs) const { return natural_less(lhs, rhs); }
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t value);

} // namespace scdt

#endif // SCDT_CORE_HPP
