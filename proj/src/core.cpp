#include "scdt/core.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace scdt {

std::string format_fraction(const Rational& value) {
    return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorKind::Parse, "core.ParseError", "not a rational number: '" + std::string(whole) + "'");
    }
    return out;
}

} // namespace

Rational parse_rational(std::string_view text) {
    const std::string_view whole = text;
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        const auto num = parse_int(text.substr(0, slash), whole);
        const auto den = parse_int(text.substr(slash + 1), whole);
        if (den == 0) throw Error(ErrorKind::Parse, "core.ParseError", "zero denominator: '" + std::string(whole) + "'");
        return Rational(num, den);
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        bool negative = !text.empty() && text.front() == '-';
        auto int_part = text.substr(negative ? 1 : 0, dot - (negative ? 1 : 0));
        auto frac_part = text.substr(dot + 1);
        if (frac_part.empty() || frac_part.size() > 15) {
            throw Error(ErrorKind::Parse, "core.ParseError", "bad decimal: '" + std::string(whole) + "'");
        }
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
        const auto ip = int_part.empty() ? 0 : parse_int(int_part, whole);
        const auto fp = parse_int(frac_part, whole);
        Rational r(ip * scale + fp, scale);
        return negative ? -r : r;
    }
    return Rational(parse_int(text, whole));
}

std::int64_t ceil_nonneg(const Rational& value) {
    const auto n = value.numerator();
    const auto d = value.denominator();
    return n <= 0 ? 0 : (n + d - 1) / d;
}

bool natural_less(std::string_view lhs, std::string_view rhs) {
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < lhs.size() && j < rhs.size()) {
        const bool ld = std::isdigit(static_cast<unsigned char>(lhs[i]));
        const bool rd = std::isdigit(static_cast<unsigned char>(rhs[j]));
        if (ld && rd) {
            std::size_t ie = i;
            std::size_t je = j;
            while (ie < lhs.size() && std::isdigit(static_cast<unsigned char>(lhs[ie]))) ++ie;
            while (je < rhs.size() && std::isdigit(static_cast<unsigned char>(rhs[je]))) ++je;
            auto a = lhs.substr(i, ie - i);
            auto b = rhs.substr(j, je - j);
            while (a.size() > 1 && a.front() == '0') a.remove_prefix(1);
            while (b.size() > 1 && b.front() == '0') b.remove_prefix(1);
            if (a.size() != b.size()) return a.size() < b.size();
            if (a != b) return a < b;
            // equal values: shorter raw run (fewer leading zeros) first keeps the order strict
            if (ie - i != je - j) return (ie - i) < (je - j);
            i = ie;
            j = je;
            continue;
        }
        if (lhs[i] != rhs[j]) return static_cast<unsigned char>(lhs[i]) < static_cast<unsigned char>(rhs[j]);
        ++i;
        ++j;
    }
    return (lhs.size() - i) < (rhs.size() - j);
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

} // namespace scdt
