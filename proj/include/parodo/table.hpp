#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "parodo/measure.hpp"
#include "parodo/rational.hpp"

namespace parodo {

/// Exact joint counts N(m, p) over parity patterns xi in {0,1}^{hi-lo+1}:
/// m = sum of j*xi_j for j in [lo, hi], p = sum of xi_j mod 2.
/// Empty ranges (hi = lo - 1) are allowed and carry the single empty pattern.
struct WeightedParityTable {
    int lo = 1;
    int hi = 0;
    std::int64_t wsum = 0;                         // sum of j over [lo, hi]
    std::vector<std::array<BigInt, 2>> counts;     // index m in [0, wsum]
    std::vector<std::array<BigInt, 2>> cumulative; // inclusive prefix sums over m

    int width() const { return hi - lo + 1; }
    BigInt total() const { return bigint_pow(BigInt(2), static_cast<std::uint64_t>(width())); }

    const BigInt& count(std::int64_t m, int p) const;
    /// Count with m in the closed integer range [mlo, mhi] (clamped) and parity p.
    BigInt count_range(std::int64_t mlo, std::int64_t mhi, int p) const;
    BigInt count_range_both(std::int64_t mlo, std::int64_t mhi) const;

    /// count_range / 2^width as an exact probability.
    Rational mass_range(std::int64_t mlo, std::int64_t mhi, std::optional<int> p) const;

    bool occupied(std::int64_t m, int p) const;
    std::optional<std::int64_t> min_occupied(std::int64_t mlo, std::int64_t mhi, int p) const;
    std::optional<std::int64_t> max_occupied(std::int64_t mlo, std::int64_t mhi, int p) const;
};

/// Dynamic program over levels lo..hi.
WeightedParityTable build_table(int lo, int hi);

/// Independent oracle: explicit enumeration of all 2^(hi-lo+1) patterns.
/// Requires hi - lo + 1 <= 24.
WeightedParityTable brute_table(int lo, int hi);

/// Lexicographically smallest block word over levels [lo, hi] whose weighted
/// parity sum m lies in the closed window and whose pattern parity matches
/// (when constrained). Symbols are 0 or 1 (1 is the smallest nonzero symbol
/// at every level); entry k of the result is the symbol at level lo + k.
/// Throws NotFoundError when the window holds no pattern.
std::vector<std::int64_t> lex_min_block_word(int lo, int hi, std::int64_t mlo, std::int64_t mhi,
                                             std::optional<int> parity_target);

} // namespace parodo
