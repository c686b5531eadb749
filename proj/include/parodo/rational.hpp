#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "parodo/errors.hpp"

namespace parodo {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt bigint_pow(const BigInt& base, std::uint64_t e) {
    BigInt r{1};
    BigInt b = base;
    while (e > 0) {
        if (e & 1u) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

/// base^e for integer e of either sign (base != 0 when e < 0).
inline Rational rational_pow(const Rational& base, std::int64_t e) {
    if (e >= 0) {
        const BigInt n = bigint_pow(numerator(base), static_cast<std::uint64_t>(e));
        const BigInt d = bigint_pow(denominator(base), static_cast<std::uint64_t>(e));
        return Rational(n, d);
    }
    if (base == 0) throw Error("rational_pow: zero base with negative exponent");
    const std::uint64_t k = static_cast<std::uint64_t>(-(e + 1)) + 1u;
    const BigInt n = bigint_pow(numerator(base), k);
    const BigInt d = bigint_pow(denominator(base), k);
    return Rational(d, n);
}

/// Serialized form "num/den" (denominator always present and positive).
inline std::string rational_str(const Rational& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

inline Rational rational_parse(const std::string& s) {
    const auto slash = s.find('/');
    BigInt num, den{1};
    try {
        if (slash == std::string::npos) {
            num = BigInt(s);
        } else {
            num = BigInt(s.substr(0, slash));
            den = BigInt(s.substr(slash + 1));
        }
    } catch (const std::runtime_error&) {
        throw ConfigError("rational_parse: malformed rational \"" + s + "\"");
    }
    if (den == 0) throw ConfigError("rational_parse: zero denominator in \"" + s + "\"");
    return Rational(num, den);
}

inline double rational_double(const Rational& r) {
    return r.convert_to<double>();
}

/// Largest integer <= r.
inline BigInt rational_floor(const Rational& r) {
    BigInt q = numerator(r) / denominator(r);
    if (numerator(r) < 0 && q * denominator(r) != numerator(r)) --q;
    return q;
}

/// Smallest integer >= r.
inline BigInt rational_ceil(const Rational& r) {
    return -rational_floor(-r);
}

/// Floor/ceil clamped into int64 (values in this codebase stay far inside).
inline std::int64_t rational_floor_i64(const Rational& r) {
    return rational_floor(r).convert_to<std::int64_t>();
}
inline std::int64_t rational_ceil_i64(const Rational& r) {
    return rational_ceil(r).convert_to<std::int64_t>();
}

} // namespace parodo
