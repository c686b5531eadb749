#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "parodo/errors.hpp"
#include "parodo/rational.hpp"

namespace parodo {

/// Alphabet plan: level j carries symbols {0, 1, ..., q^j}.
struct BaseSchedule {
    std::int64_t q = 5;
    int depth = 0;

    BaseSchedule() = default;
    BaseSchedule(std::int64_t q_, int depth_) : q(q_), depth(depth_) {
        if (q < 2) throw ConfigError("BaseSchedule: q must be >= 2");
        if (depth < 0) throw ConfigError("BaseSchedule: negative depth");
    }

    void require_level(int j) const {
        if (j < 1 || j > depth)
            throw SymbolRangeError("level " + std::to_string(j) + " outside materialized depth " +
                                   std::to_string(depth));
    }

    /// q^j, the largest symbol at level j.
    BigInt level_max(int j) const {
        require_level(j);
        return bigint_pow(BigInt(q), static_cast<std::uint64_t>(j));
    }

    /// q^j + 1 symbols at level j.
    BigInt level_size(int j) const { return level_max(j) + 1; }

    /// q^j as a machine integer; throws when it does not fit.
    std::int64_t level_max_i64(int j) const {
        const BigInt m = level_max(j);
        if (m > BigInt(INT64_MAX))
            throw SymbolRangeError("level " + std::to_string(j) + " alphabet exceeds int64");
        return m.convert_to<std::int64_t>();
    }
};

inline int parity_bit(std::int64_t v) { return v == 0 ? 0 : 1; }

/// Occupancy indicator pi_j: 0 at symbol 0, 1 otherwise. Validates the symbol range.
inline int parity(const BaseSchedule& sched, int j, std::int64_t v) {
    if (v < 0 || BigInt(v) > sched.level_max(j))
        throw SymbolRangeError("symbol " + std::to_string(v) + " out of range at level " +
                               std::to_string(j));
    return parity_bit(v);
}

/// mu_j(0) = 1/2, mu_j(v) = 1/(2 q^j) for v != 0.
inline Rational symbol_measure(const BaseSchedule& sched, int j, std::int64_t v) {
    if (v < 0 || BigInt(v) > sched.level_max(j))
        throw SymbolRangeError("symbol " + std::to_string(v) + " out of range at level " +
                               std::to_string(j));
    if (v == 0) return Rational(1, 2);
    return Rational(BigInt(1), 2 * sched.level_max(j));
}

/// Exact element of the lattice Z*log2 + Z*logq.
struct LogValue {
    std::int64_t a = 0; // coefficient of log 2
    std::int64_t b = 0; // coefficient of log q

    friend LogValue operator+(LogValue x, LogValue y) { return {x.a + y.a, x.b + y.b}; }
    friend LogValue operator-(LogValue x, LogValue y) { return {x.a - y.a, x.b - y.b}; }
    LogValue operator-() const { return {-a, -b}; }
    friend bool operator==(LogValue x, LogValue y) { return x.a == y.a && x.b == y.b; }
};

/// log mu_j(v) = -log2 - pi_j(v) * j * logq, exactly in the lattice.
inline LogValue log_measure(const BaseSchedule& sched, int j, std::int64_t v) {
    const int p = parity(sched, j, v);
    return LogValue{-1, -static_cast<std::int64_t>(p) * j};
}

/// a*ln2 + b*lnq evaluated through long double intermediates.
inline double logvalue_real(LogValue lv, std::int64_t q);

/// Finite word (x_1, ..., x_n), one symbol per level.
struct Prefix {
    std::vector<std::int64_t> word;

    Prefix() = default;
    explicit Prefix(std::vector<std::int64_t> w) : word(std::move(w)) {}
    std::size_t size() const { return word.size(); }
    std::int64_t at(int j) const { return word.at(static_cast<std::size_t>(j - 1)); }
};

void validate_prefix(const BaseSchedule& sched, const Prefix& p);
Rational prefix_measure(const BaseSchedule& sched, const Prefix& p);
LogValue prefix_log_measure(const BaseSchedule& sched, const Prefix& p);

/// Subset of one level's alphabet: an optional 0 plus disjoint closed
/// intervals of nonzero symbols. Interval endpoints are big integers because
/// deep levels have alphabets far beyond int64.
struct SymbolSet {
    bool zero = false;
    std::vector<std::pair<BigInt, BigInt>> intervals;

    static SymbolSet empty_set() { return {}; }
    static SymbolSet zero_only() { return {true, {}}; }
    static SymbolSet nonzero_range(const BigInt& a, const BigInt& b);
    static SymbolSet nonzero_all(const BaseSchedule& sched, int j) {
        return nonzero_range(1, sched.level_max(j));
    }
    static SymbolSet all(const BaseSchedule& sched, int j) {
        SymbolSet s = nonzero_all(sched, j);
        s.zero = true;
        return s;
    }
    static SymbolSet single(const BigInt& v) {
        if (v == 0) return zero_only();
        return nonzero_range(v, v);
    }
    static SymbolSet from_symbols(const std::vector<std::int64_t>& vs);

    bool is_empty() const { return !zero && intervals.empty(); }
    BigInt nonzero_count() const;
    bool contains(const BigInt& v) const;
    void normalize();

    friend bool operator==(const SymbolSet&, const SymbolSet&) = default;
};

SymbolSet set_intersect(const SymbolSet& x, const SymbolSet& y);
SymbolSet set_subtract(const SymbolSet& x, const SymbolSet& y);
Rational symbol_set_measure(const BaseSchedule& sched, int j, const SymbolSet& s);

/// Conjunctive cylinder: per-level symbol sets on a finite support.
/// Levels absent from the support are unconstrained.
struct Cylinder {
    std::vector<std::pair<int, SymbolSet>> constraints; // sorted by level

    Cylinder() = default;
    explicit Cylinder(std::vector<std::pair<int, SymbolSet>> cs);
    const SymbolSet* find(int level) const;
    void restrict_level(int level, SymbolSet s);
    bool has_empty_constraint() const;
};

Cylinder cylinder_from_prefix(const Prefix& p);
Rational cylinder_measure(const BaseSchedule& sched, const Cylinder& c);

/// Measure of a finite union, computed through a disjoint decomposition
/// (never inclusion-exclusion).
Rational cylinder_union_measure(const BaseSchedule& sched, const std::vector<Cylinder>& cs);

/// C minus D as a list of pairwise disjoint cylinders.
std::vector<Cylinder> cylinder_subtract(const BaseSchedule& sched, const Cylinder& c,
                                        const Cylinder& d);

} // namespace parodo
