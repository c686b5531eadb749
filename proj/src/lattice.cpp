#include "parodo/lattice.hpp"

#include <cmath>
#include <cstdlib>

#include "parodo/errors.hpp"

namespace parodo {

double log_base(std::int64_t q) {
    return static_cast<double>(std::log(static_cast<long double>(q)));
}

double logaffine_real(const LogAffine& v, std::int64_t q) {
    const long double r = rational_double(v.a) * 0.693147180559945309417232121458L +
                          rational_double(v.b) * std::log(static_cast<long double>(q));
    return static_cast<double>(r);
}

int logaffine_sign(const LogAffine& v, std::int64_t q) {
    // Clear denominators: sign(A*log2 + B*logq) with integers A, B.
    const BigInt da = denominator(v.a), db = denominator(v.b);
    const BigInt g = boost::multiprecision::lcm(da, db);
    const BigInt A = numerator(v.a) * (g / da);
    const BigInt B = numerator(v.b) * (g / db);
    if (A == 0 && B == 0) return 0;
    if (A >= 0 && B >= 0) return 1;
    if (A <= 0 && B <= 0) return -1;
    // Opposite signs: compare 2^|A| against q^|B|.
    const BigInt absA = abs(A), absB = abs(B);
    if (absA > BigInt(4'000'000) || absB > BigInt(4'000'000))
        throw BudgetExceeded("logaffine_sign: exponents too large for exact comparison");
    const BigInt p2 = bigint_pow(BigInt(2), absA.convert_to<std::uint64_t>());
    const BigInt pq = bigint_pow(BigInt(q), absB.convert_to<std::uint64_t>());
    const int cmp = p2 == pq ? 0 : (p2 > pq ? 1 : -1);
    // A > 0 > B: sign = sign(2^A vs q^|B|); otherwise flipped.
    return A > 0 ? cmp : -cmp;
}

GuardedCompare guarded_less(double lhs, double rhs, double guard) {
    GuardedCompare r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.holds = lhs < rhs;
    const double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
    r.borderline = std::fabs(lhs - rhs) <= guard * scale;
    return r;
}

} // namespace parodo
