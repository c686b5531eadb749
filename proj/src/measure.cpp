#include "parodo/measure.hpp"

#include <algorithm>
#include <cmath>

namespace parodo {

double logvalue_real(LogValue lv, std::int64_t q) {
    const long double v = static_cast<long double>(lv.a) * 0.693147180559945309417232121458L +
                          static_cast<long double>(lv.b) * std::log(static_cast<long double>(q));
    return static_cast<double>(v);
}

void validate_prefix(const BaseSchedule& sched, const Prefix& p) {
    if (static_cast<int>(p.size()) > sched.depth)
        throw SymbolRangeError("prefix longer than materialized depth");
    for (int j = 1; j <= static_cast<int>(p.size()); ++j) {
        const std::int64_t v = p.at(j);
        if (v < 0 || BigInt(v) > sched.level_max(j))
            throw SymbolRangeError("symbol " + std::to_string(v) + " out of range at level " +
                                   std::to_string(j));
    }
}

Rational prefix_measure(const BaseSchedule& sched, const Prefix& p) {
    Rational m{1};
    for (int j = 1; j <= static_cast<int>(p.size()); ++j) m *= symbol_measure(sched, j, p.at(j));
    return m;
}

LogValue prefix_log_measure(const BaseSchedule& sched, const Prefix& p) {
    LogValue lv;
    for (int j = 1; j <= static_cast<int>(p.size()); ++j) lv = lv + log_measure(sched, j, p.at(j));
    return lv;
}

SymbolSet SymbolSet::nonzero_range(const BigInt& a, const BigInt& b) {
    if (a < 1) throw SymbolRangeError("nonzero_range: lower endpoint below 1");
    SymbolSet s;
    if (a <= b) s.intervals.emplace_back(a, b);
    return s;
}

SymbolSet SymbolSet::from_symbols(const std::vector<std::int64_t>& vs) {
    SymbolSet s;
    for (const std::int64_t v : vs) {
        if (v < 0) throw SymbolRangeError("from_symbols: negative symbol");
        if (v == 0)
            s.zero = true;
        else
            s.intervals.emplace_back(v, v);
    }
    s.normalize();
    return s;
}

void SymbolSet::normalize() {
    if (intervals.empty()) return;
    std::sort(intervals.begin(), intervals.end());
    std::vector<std::pair<BigInt, BigInt>> merged;
    for (auto& iv : intervals) {
        if (iv.first > iv.second) continue;
        if (!merged.empty() && iv.first <= merged.back().second + 1)
            merged.back().second = std::max(merged.back().second, iv.second);
        else
            merged.push_back(iv);
    }
    intervals = std::move(merged);
}

BigInt SymbolSet::nonzero_count() const {
    BigInt n{0};
    for (const auto& iv : intervals) n += iv.second - iv.first + 1;
    return n;
}

bool SymbolSet::contains(const BigInt& v) const {
    if (v == 0) return zero;
    for (const auto& iv : intervals)
        if (iv.first <= v && v <= iv.second) return true;
    return false;
}

SymbolSet set_intersect(const SymbolSet& x, const SymbolSet& y) {
    SymbolSet r;
    r.zero = x.zero && y.zero;
    for (const auto& a : x.intervals)
        for (const auto& b : y.intervals) {
            const BigInt lo = std::max(a.first, b.first);
            const BigInt hi = std::min(a.second, b.second);
            if (lo <= hi) r.intervals.emplace_back(lo, hi);
        }
    r.normalize();
    return r;
}

SymbolSet set_subtract(const SymbolSet& x, const SymbolSet& y) {
    SymbolSet r;
    r.zero = x.zero && !y.zero;
    for (const auto& a : x.intervals) {
        BigInt lo = a.first;
        const BigInt hi = a.second;
        for (const auto& b : y.intervals) {
            if (b.second < lo) continue;
            if (b.first > hi) break;
            if (b.first > lo) r.intervals.emplace_back(lo, b.first - 1);
            lo = b.second + 1;
            if (lo > hi) break;
        }
        if (lo <= hi) r.intervals.emplace_back(lo, hi);
    }
    r.normalize();
    return r;
}

Rational symbol_set_measure(const BaseSchedule& sched, int j, const SymbolSet& s) {
    const BigInt qj = sched.level_max(j);
    for (const auto& iv : s.intervals)
        if (iv.second > qj) throw SymbolRangeError("symbol set exceeds level alphabet");
    Rational m = s.zero ? Rational(1, 2) : Rational(0);
    m += Rational(s.nonzero_count(), 2 * qj);
    return m;
}

Cylinder::Cylinder(std::vector<std::pair<int, SymbolSet>> cs) : constraints(std::move(cs)) {
    std::sort(constraints.begin(), constraints.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < constraints.size(); ++i)
        if (constraints[i].first == constraints[i - 1].first)
            throw ConfigError("Cylinder: duplicate constraint level");
}

const SymbolSet* Cylinder::find(int level) const {
    for (const auto& c : constraints)
        if (c.first == level) return &c.second;
    return nullptr;
}

void Cylinder::restrict_level(int level, SymbolSet s) {
    for (auto& c : constraints)
        if (c.first == level) {
            c.second = std::move(s);
            return;
        }
    constraints.emplace_back(level, std::move(s));
    std::sort(constraints.begin(), constraints.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

bool Cylinder::has_empty_constraint() const {
    for (const auto& c : constraints)
        if (c.second.is_empty()) return true;
    return false;
}

Cylinder cylinder_from_prefix(const Prefix& p) {
    std::vector<std::pair<int, SymbolSet>> cs;
    for (int j = 1; j <= static_cast<int>(p.size()); ++j)
        cs.emplace_back(j, SymbolSet::single(BigInt(p.at(j))));
    return Cylinder(std::move(cs));
}

Rational cylinder_measure(const BaseSchedule& sched, const Cylinder& c) {
    Rational m{1};
    for (const auto& [level, set] : c.constraints) {
        sched.require_level(level);
        m *= symbol_set_measure(sched, level, set);
    }
    return m;
}

std::vector<Cylinder> cylinder_subtract(const BaseSchedule& sched, const Cylinder& c,
                                        const Cylinder& d) {
    std::vector<Cylinder> out;
    Cylinder running = c;
    for (const auto& [level, dset] : d.constraints) {
        sched.require_level(level);
        const SymbolSet* rs = running.find(level);
        const SymbolSet cur = rs != nullptr ? *rs : SymbolSet::all(sched, level);
        SymbolSet diff = set_subtract(cur, dset);
        if (!diff.is_empty()) {
            Cylinder piece = running;
            piece.restrict_level(level, std::move(diff));
            out.push_back(std::move(piece));
        }
        SymbolSet inter = set_intersect(cur, dset);
        if (inter.is_empty()) return out; // nothing left meets d
        running.restrict_level(level, std::move(inter));
    }
    // `running` is now contained in d and is dropped.
    return out;
}

Rational cylinder_union_measure(const BaseSchedule& sched, const std::vector<Cylinder>& cs) {
    std::vector<Cylinder> pieces;
    for (const Cylinder& c : cs) {
        if (c.has_empty_constraint()) continue;
        std::vector<Cylinder> rem{c};
        for (const Cylinder& d : pieces) {
            std::vector<Cylinder> next;
            for (const Cylinder& r : rem) {
                auto parts = cylinder_subtract(sched, r, d);
                next.insert(next.end(), parts.begin(), parts.end());
            }
            rem = std::move(next);
            if (rem.empty()) break;
        }
        pieces.insert(pieces.end(), rem.begin(), rem.end());
    }
    Rational m{0};
    for (const Cylinder& p : pieces) m += cylinder_measure(sched, p);
    return m;
}

} // namespace parodo
