#pragma once

#include <cstdint>

#include "parodo/rational.hpp"

namespace parodo {

/// a*log2 + b*logq with exact rational coefficients (the centering constants
/// live on half-integer lattice points, so integer coefficients are not
/// enough here).
struct LogAffine {
    Rational a;
    Rational b;

    friend LogAffine operator+(const LogAffine& x, const LogAffine& y) {
        return {x.a + y.a, x.b + y.b};
    }
    friend LogAffine operator-(const LogAffine& x, const LogAffine& y) {
        return {x.a - y.a, x.b - y.b};
    }
    friend bool operator==(const LogAffine&, const LogAffine&) = default;
};

double logaffine_real(const LogAffine& v, std::int64_t q);

/// Exact sign of a*log2 + b*logq, decided by big-integer power comparison
/// (2^A vs q^B after clearing denominators). Never consults floating point.
int logaffine_sign(const LogAffine& v, std::int64_t q);

/// Result of a floating-point comparison with an explicit guard band:
/// `borderline` is set when the two sides agree within `guard` relative
/// tolerance, i.e. when the verdict should not be trusted blindly.
struct GuardedCompare {
    bool holds = false;
    bool borderline = false;
    double lhs = 0.0;
    double rhs = 0.0;
};

GuardedCompare guarded_less(double lhs, double rhs, double guard = 1e-9);

double log_base(std::int64_t q); // ln q through long double

} // namespace parodo
