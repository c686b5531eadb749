#include "parodo/table.hpp"

#include <algorithm>

#include "parodo/errors.hpp"

namespace parodo {

namespace {

constexpr std::int64_t kMaxWeightSum = 2'000'000; // memory gate for the DP

std::int64_t range_wsum(int lo, int hi) {
    std::int64_t w = 0;
    for (int j = lo; j <= hi; ++j) w += j;
    return w;
}

void check_range(int lo, int hi) {
    if (lo < 1) throw SymbolRangeError("table range must start at level >= 1");
    if (hi < lo - 1) throw SymbolRangeError("table range ends before it starts");
    if (range_wsum(lo, hi) > kMaxWeightSum)
        throw BudgetExceeded("table range too large: weight sum exceeds memory budget");
}

void finish(WeightedParityTable& t) {
    t.cumulative.resize(t.counts.size());
    BigInt c0{0}, c1{0};
    for (std::size_t m = 0; m < t.counts.size(); ++m) {
        c0 += t.counts[m][0];
        c1 += t.counts[m][1];
        t.cumulative[m] = {c0, c1};
    }
}

} // namespace

const BigInt& WeightedParityTable::count(std::int64_t m, int p) const {
    static const BigInt zero{0};
    if (m < 0 || m > wsum) return zero;
    return counts[static_cast<std::size_t>(m)][p & 1];
}

BigInt WeightedParityTable::count_range(std::int64_t mlo, std::int64_t mhi, int p) const {
    mlo = std::max<std::int64_t>(mlo, 0);
    mhi = std::min<std::int64_t>(mhi, wsum);
    if (mlo > mhi) return BigInt{0};
    const BigInt upper = cumulative[static_cast<std::size_t>(mhi)][p & 1];
    if (mlo == 0) return upper;
    return upper - cumulative[static_cast<std::size_t>(mlo - 1)][p & 1];
}

BigInt WeightedParityTable::count_range_both(std::int64_t mlo, std::int64_t mhi) const {
    return count_range(mlo, mhi, 0) + count_range(mlo, mhi, 1);
}

Rational WeightedParityTable::mass_range(std::int64_t mlo, std::int64_t mhi,
                                         std::optional<int> p) const {
    const BigInt n = p.has_value() ? count_range(mlo, mhi, *p) : count_range_both(mlo, mhi);
    return Rational(n, total());
}

bool WeightedParityTable::occupied(std::int64_t m, int p) const { return count(m, p) != 0; }

std::optional<std::int64_t> WeightedParityTable::min_occupied(std::int64_t mlo, std::int64_t mhi,
                                                              int p) const {
    mlo = std::max<std::int64_t>(mlo, 0);
    mhi = std::min<std::int64_t>(mhi, wsum);
    for (std::int64_t m = mlo; m <= mhi; ++m)
        if (occupied(m, p)) return m;
    return std::nullopt;
}

std::optional<std::int64_t> WeightedParityTable::max_occupied(std::int64_t mlo, std::int64_t mhi,
                                                              int p) const {
    mlo = std::max<std::int64_t>(mlo, 0);
    mhi = std::min<std::int64_t>(mhi, wsum);
    for (std::int64_t m = mhi; m >= mlo; --m)
        if (occupied(m, p)) return m;
    return std::nullopt;
}

WeightedParityTable build_table(int lo, int hi) {
    check_range(lo, hi);
    WeightedParityTable t;
    t.lo = lo;
    t.hi = hi;
    t.wsum = range_wsum(lo, hi);
    t.counts.assign(static_cast<std::size_t>(t.wsum) + 1, {BigInt{0}, BigInt{0}});
    t.counts[0][0] = 1;
    std::int64_t w = 0;
    for (int j = lo; j <= hi; ++j) {
        w += j;
        for (std::int64_t m = w; m >= j; --m) {
            const auto& src = t.counts[static_cast<std::size_t>(m - j)];
            auto& dst = t.counts[static_cast<std::size_t>(m)];
            dst[0] += src[1];
            dst[1] += src[0];
        }
    }
    finish(t);
    return t;
}

WeightedParityTable brute_table(int lo, int hi) {
    check_range(lo, hi);
    const int n = hi - lo + 1;
    if (n > 24) throw BudgetExceeded("brute_table: range wider than 24 levels");
    WeightedParityTable t;
    t.lo = lo;
    t.hi = hi;
    t.wsum = range_wsum(lo, hi);
    t.counts.assign(static_cast<std::size_t>(t.wsum) + 1, {BigInt{0}, BigInt{0}});
    const std::uint32_t limit = n == 0 ? 1u : (1u << n);
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
        std::int64_t m = 0;
        int p = 0;
        for (int bit = 0; bit < n; ++bit)
            if (mask & (1u << bit)) {
                m += lo + bit;
                p ^= 1;
            }
        t.counts[static_cast<std::size_t>(m)][p] += 1;
    }
    finish(t);
    return t;
}

namespace {

/// reach[idx][p] marks the weighted sums attainable over levels [lo+idx, hi]
/// with pattern parity p, as bitsets over m.
struct Reachability {
    int lo, hi;
    std::int64_t wsum;
    std::size_t words;
    std::vector<std::vector<std::uint64_t>> bits; // (n+1)*2 rows

    Reachability(int lo_, int hi_) : lo(lo_), hi(hi_), wsum(range_wsum(lo_, hi_)) {
        const int n = hi - lo + 1;
        words = static_cast<std::size_t>(wsum / 64 + 1);
        bits.assign(static_cast<std::size_t>(2 * (n + 1)), std::vector<std::uint64_t>(words, 0));
        row(n, 0)[0] = 1; // empty suffix: m = 0, even
        for (int idx = n - 1; idx >= 0; --idx) {
            const int j = lo + idx;
            for (int p = 0; p < 2; ++p) {
                auto& dst = row(idx, p);
                const auto& keep = row(idx + 1, p);
                const auto& take = row(idx + 1, p ^ 1);
                for (std::size_t w = 0; w < words; ++w) dst[w] = keep[w];
                shift_or(dst, take, j);
            }
        }
    }

    std::vector<std::uint64_t>& row(int idx, int p) {
        return bits[static_cast<std::size_t>(2 * idx + p)];
    }
    const std::vector<std::uint64_t>& row(int idx, int p) const {
        return bits[static_cast<std::size_t>(2 * idx + p)];
    }

    static void shift_or(std::vector<std::uint64_t>& dst, const std::vector<std::uint64_t>& src,
                         std::int64_t shift) {
        const std::size_t word_shift = static_cast<std::size_t>(shift / 64);
        const int bit_shift = static_cast<int>(shift % 64);
        const std::size_t n = dst.size();
        for (std::size_t w = n; w-- > 0;) {
            if (w < word_shift) break;
            std::uint64_t v = src[w - word_shift] << bit_shift;
            if (bit_shift != 0 && w > word_shift) v |= src[w - word_shift - 1] >> (64 - bit_shift);
            dst[w] |= v;
        }
    }

    bool any_in(int idx, int p, std::int64_t mlo, std::int64_t mhi) const {
        mlo = std::max<std::int64_t>(mlo, 0);
        mhi = std::min<std::int64_t>(mhi, wsum);
        if (mlo > mhi) return false;
        const auto& r = row(idx, p);
        const std::size_t wlo = static_cast<std::size_t>(mlo / 64);
        const std::size_t whi = static_cast<std::size_t>(mhi / 64);
        for (std::size_t w = wlo; w <= whi; ++w) {
            std::uint64_t v = r[w];
            if (w == wlo) v &= ~0ull << (mlo % 64);
            if (w == whi) {
                const int top = static_cast<int>(mhi % 64);
                if (top != 63) v &= (1ull << (top + 1)) - 1;
            }
            if (v != 0) return true;
        }
        return false;
    }
};

} // namespace

std::vector<std::int64_t> lex_min_block_word(int lo, int hi, std::int64_t mlo, std::int64_t mhi,
                                             std::optional<int> parity_target) {
    check_range(lo, hi);
    const Reachability reach(lo, hi);
    const int n = hi - lo + 1;
    auto feasible = [&](int idx, int p_sofar, std::int64_t m_sofar) {
        const std::int64_t lo_need = mlo - m_sofar;
        const std::int64_t hi_need = mhi - m_sofar;
        if (!parity_target.has_value())
            return reach.any_in(idx, 0, lo_need, hi_need) || reach.any_in(idx, 1, lo_need, hi_need);
        return reach.any_in(idx, (*parity_target ^ p_sofar) & 1, lo_need, hi_need);
    };
    if (!feasible(0, 0, 0)) throw NotFoundError("lex_min_block_word: empty window");
    std::vector<std::int64_t> word(static_cast<std::size_t>(n), 0);
    int p = 0;
    std::int64_t m = 0;
    for (int idx = 0; idx < n; ++idx) {
        if (feasible(idx + 1, p, m)) continue; // symbol 0 works
        word[static_cast<std::size_t>(idx)] = 1;
        p ^= 1;
        m += lo + idx;
        if (!feasible(idx + 1, p, m))
            throw NotFoundError("lex_min_block_word: inconsistent reachability");
    }
    return word;
}

} // namespace parodo
