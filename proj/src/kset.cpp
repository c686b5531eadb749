#include "parodo/krieger.hpp"
#include "parodo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace parodo {

namespace {

// Closed integer window on |delta m| equivalent to the open interval
// e^(s-delta) < |delta m| * lnq < e^(s+delta).
struct CocycleWindow {
    std::int64_t blo = 1;
    std::int64_t bhi = 0;
    bool borderline = false;
};

bool near_integer(double x) {
    const double r = std::nearbyint(x);
    return std::fabs(x - r) <= 1e-9 * std::max(1.0, std::fabs(x));
}

CocycleWindow cocycle_window(std::int64_t q, double s, double delta) {
    if (delta <= 0) throw ConfigError("k_set_measure: delta must be positive");
    const double lnq = std::log(static_cast<double>(q));
    const double lo_f = std::exp(s - delta) / lnq;
    const double hi_f = std::exp(s + delta) / lnq;
    constexpr double kCap = 4.0e18;

    CocycleWindow w;
    w.borderline = near_integer(lo_f) || near_integer(hi_f);
    if (lo_f >= kCap) {
        w.blo = 1;
        w.bhi = 0;
        return w;
    }
    w.blo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(lo_f)) + 1);
    w.bhi = hi_f >= kCap ? static_cast<std::int64_t>(kCap)
                         : static_cast<std::int64_t>(std::ceil(hi_f)) - 1;
    return w;
}

std::vector<int> allowed_parities(std::optional<int> fixed) {
    if (fixed) return {*fixed};
    return {0, 1};
}

void require_full_coverage(const StatPredicate& sp, int depth) {
    std::vector<int> levels;
    for (const auto& p : sp.pins) levels.push_back(p.level);
    for (int j = sp.free_lo; j <= sp.free_hi; ++j) levels.push_back(j);
    std::sort(levels.begin(), levels.end());
    std::vector<int> want;
    for (int j = 1; j <= depth; ++j) want.push_back(j);
    if (levels != want)
        throw ConfigError("k_set_measure: predicate must cover levels [1, depth] exactly");
}

StatPredicate whole_space_predicate(int depth) {
    StatPredicate sp;
    sp.free_lo = 1;
    sp.free_hi = depth;
    return sp;
}

Rational exact_predicate_kset(const WeightedParityTable& t, const StatPredicate& sp,
                              const CocycleWindow& w, KsetRelation rel) {
    const auto fw = sp.free_window();
    const auto fp = sp.free_parity();
    if (fw.first > fw.second || w.blo > w.bhi) return Rational(0);

    BigInt hits{0};
    for (std::int64_t m = fw.first; m <= fw.second; ++m) {
        for (const int p : allowed_parities(fp)) {
            if (!t.occupied(m, p)) continue;
            const std::vector<int> pp =
                rel == KsetRelation::parity ? std::vector<int>{p} : allowed_parities(fp);
            const std::int64_t l1 = std::max(fw.first, m - w.bhi);
            const std::int64_t r1 = std::min(fw.second, m - w.blo);
            const std::int64_t l2 = std::max(fw.first, m + w.blo);
            const std::int64_t r2 = std::min(fw.second, m + w.bhi);
            BigInt partners{0};
            for (const int p2 : pp) {
                if (l1 <= r1) partners += t.count_range(l1, r1, p2);
                if (l2 <= r2) partners += t.count_range(l2, r2, p2);
            }
            if (partners > 0) hits += t.count(m, p);
        }
    }
    return Rational(hits, t.total() * bigint_pow(BigInt(2), sp.pins.size()));
}

// --- cylinder-union machinery -----------------------------------------------

struct ClassMasses {
    std::int64_t wsum = 0;
    std::vector<std::array<Rational, 2>> mass; // index m in [0, wsum]
};

// Exact mass of (union of disjoint cylinders) intersected with each pattern
// class (m, p) over levels [1, depth].
ClassMasses class_masses(const BaseSchedule& sched, const std::vector<Cylinder>& disjoint,
                         int depth) {
    ClassMasses out;
    out.wsum = static_cast<std::int64_t>(depth) * (depth + 1) / 2;
    out.mass.assign(static_cast<std::size_t>(out.wsum + 1), {Rational(0), Rational(0)});
    for (const Cylinder& c : disjoint) {
        if (c.has_empty_constraint()) continue;
        bool out_of_window = false;
        for (const auto& [level, set] : c.constraints)
            if (level > depth) out_of_window = true;
        if (out_of_window)
            throw ConfigError("k_set_measure: cylinder constraint beyond the depth window");
        std::vector<std::array<Rational, 2>> dp(static_cast<std::size_t>(out.wsum + 1),
                                                {Rational(0), Rational(0)});
        dp[0][0] = 1;
        std::int64_t reach = 0;
        for (int j = 1; j <= depth; ++j) {
            Rational zero_mass(1, 2), nonzero_mass(1, 2);
            if (const SymbolSet* s = c.find(j)) {
                zero_mass = s->zero ? Rational(1, 2) : Rational(0);
                SymbolSet nz = *s;
                nz.zero = false;
                nonzero_mass = symbol_set_measure(sched, j, nz);
            }
            reach += j;
            for (std::int64_t m = std::min(reach, out.wsum); m >= 0; --m) {
                for (int p = 0; p < 2; ++p) {
                    Rational v = dp[m][p] * zero_mass;
                    if (m >= j) v += dp[m - j][p ^ 1] * nonzero_mass;
                    dp[m][p] = std::move(v);
                }
            }
        }
        for (std::int64_t m = 0; m <= out.wsum; ++m)
            for (int p = 0; p < 2; ++p) out.mass[m][p] += dp[m][p];
    }
    return out;
}

std::vector<Cylinder> disjointify(const BaseSchedule& sched, const std::vector<Cylinder>& cyls,
                                  std::int64_t wsum, std::uint64_t state_budget) {
    std::vector<Cylinder> disjoint;
    for (std::size_t i = 0; i < cyls.size(); ++i) {
        std::vector<Cylinder> pieces{cyls[i]};
        for (std::size_t j = 0; j < i && !pieces.empty(); ++j) {
            std::vector<Cylinder> next;
            for (const Cylinder& piece : pieces) {
                auto parts = cylinder_subtract(sched, piece, cyls[j]);
                next.insert(next.end(), parts.begin(), parts.end());
            }
            pieces = std::move(next);
            const std::uint64_t states =
                (disjoint.size() + pieces.size()) * static_cast<std::uint64_t>(wsum + 1) * 2;
            if (states > state_budget)
                throw BudgetExceeded("k_set_measure: " + std::to_string(states) +
                                     " cylinder states over budget " +
                                     std::to_string(state_budget));
        }
        disjoint.insert(disjoint.end(), pieces.begin(), pieces.end());
    }
    return disjoint;
}

// Occupancy prefix counts: occ[p][m+1] = number of occupied classes with
// weight <= m and parity p.
struct OccupancyPrefix {
    std::int64_t wsum = 0;
    std::array<std::vector<std::int64_t>, 2> pre;

    bool any(std::int64_t mlo, std::int64_t mhi, const std::vector<int>& parities) const {
        mlo = std::max<std::int64_t>(mlo, 0);
        mhi = std::min(mhi, wsum);
        if (mlo > mhi) return false;
        for (const int p : parities)
            if (pre[static_cast<std::size_t>(p)][static_cast<std::size_t>(mhi + 1)] >
                pre[static_cast<std::size_t>(p)][static_cast<std::size_t>(mlo)])
                return true;
        return false;
    }
};

OccupancyPrefix occupancy_from_masses(const ClassMasses& cm) {
    OccupancyPrefix occ;
    occ.wsum = cm.wsum;
    for (int p = 0; p < 2; ++p) {
        occ.pre[static_cast<std::size_t>(p)].assign(static_cast<std::size_t>(cm.wsum + 2), 0);
        for (std::int64_t m = 0; m <= cm.wsum; ++m)
            occ.pre[static_cast<std::size_t>(p)][static_cast<std::size_t>(m + 1)] =
                occ.pre[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)] +
                (cm.mass[static_cast<std::size_t>(m)][static_cast<std::size_t>(p)] > 0 ? 1 : 0);
    }
    return occ;
}

// Pattern-class occupancy of one cylinder, existence only (no measures).
void mark_cylinder_occupancy(const BaseSchedule& sched, const Cylinder& c, int depth,
                             std::vector<std::array<char, 2>>& occ) {
    if (c.has_empty_constraint()) return;
    const std::int64_t wsum = static_cast<std::int64_t>(depth) * (depth + 1) / 2;
    std::vector<std::array<char, 2>> dp(static_cast<std::size_t>(wsum + 1), {0, 0});
    dp[0][0] = 1;
    std::int64_t reach = 0;
    for (int j = 1; j <= depth; ++j) {
        bool zero_ok = true, nonzero_ok = true;
        if (const SymbolSet* s = c.find(j)) {
            zero_ok = s->zero;
            SymbolSet nz = *s;
            nz.zero = false;
            nonzero_ok = !nz.is_empty();
        } else {
            (void)sched;
        }
        reach += j;
        for (std::int64_t m = std::min(reach, wsum); m >= 0; --m) {
            for (int p = 0; p < 2; ++p) {
                char v = zero_ok ? dp[m][p] : 0;
                if (!v && nonzero_ok && m >= j) v = dp[m - j][p ^ 1];
                dp[m][p] = v;
            }
        }
    }
    for (std::int64_t m = 0; m <= wsum; ++m)
        for (int p = 0; p < 2; ++p)
            if (dp[m][p]) occ[static_cast<std::size_t>(m)][static_cast<std::size_t>(p)] = 1;
}

OccupancyPrefix occupancy_from_cylinders(const BaseSchedule& sched,
                                         const std::vector<Cylinder>& cyls, int depth) {
    const std::int64_t wsum = static_cast<std::int64_t>(depth) * (depth + 1) / 2;
    std::vector<std::array<char, 2>> occ(static_cast<std::size_t>(wsum + 1), {0, 0});
    for (const Cylinder& c : cyls) mark_cylinder_occupancy(sched, c, depth, occ);
    OccupancyPrefix out;
    out.wsum = wsum;
    for (int p = 0; p < 2; ++p) {
        out.pre[static_cast<std::size_t>(p)].assign(static_cast<std::size_t>(wsum + 2), 0);
        for (std::int64_t m = 0; m <= wsum; ++m)
            out.pre[static_cast<std::size_t>(p)][static_cast<std::size_t>(m + 1)] =
                out.pre[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)] +
                occ[static_cast<std::size_t>(m)][static_cast<std::size_t>(p)];
    }
    return out;
}

OccupancyPrefix occupancy_from_table(const WeightedParityTable& t) {
    OccupancyPrefix out;
    out.wsum = t.wsum;
    for (int p = 0; p < 2; ++p) {
        out.pre[static_cast<std::size_t>(p)].assign(static_cast<std::size_t>(t.wsum + 2), 0);
        for (std::int64_t m = 0; m <= t.wsum; ++m)
            out.pre[static_cast<std::size_t>(p)][static_cast<std::size_t>(m + 1)] =
                out.pre[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)] +
                (t.occupied(m, p) ? 1 : 0);
    }
    return out;
}

bool partner_in_occupancy(const OccupancyPrefix& occ, std::int64_t m, int p,
                          const CocycleWindow& w, KsetRelation rel,
                          std::optional<int> forced_parity, std::int64_t clip_lo,
                          std::int64_t clip_hi) {
    if (w.blo > w.bhi) return false;
    const std::vector<int> pp =
        rel == KsetRelation::parity ? std::vector<int>{p} : allowed_parities(forced_parity);
    return occ.any(std::max(clip_lo, m - w.bhi), std::min(clip_hi, m - w.blo), pp) ||
           occ.any(std::max(clip_lo, m + w.blo), std::min(clip_hi, m + w.bhi), pp);
}

// --- Monte Carlo -------------------------------------------------------------

struct SampledPoint {
    std::vector<BigInt> symbols; // level j at index j-1; exact only where materialized
    std::int64_t m = 0;          // weighted parity sum over [1, depth]
    int parity = 0;
};

// `materialize[j-1]` marks levels whose exact symbol value is needed (cylinder
// constraints); elsewhere only the zero/nonzero bit is drawn, with 1 standing
// in for an arbitrary nonzero symbol.
SampledPoint sample_point(const BaseSchedule& sched, int depth,
                          const std::vector<char>& materialize, SplitMix64& rng) {
    SampledPoint pt;
    pt.symbols.reserve(static_cast<std::size_t>(depth));
    for (int j = 1; j <= depth; ++j) {
        if (rng.next_bit()) {
            if (materialize[static_cast<std::size_t>(j - 1)]) {
                // Uniform nonzero symbol in [1, q^j], one base-q digit at a time.
                BigInt v{0};
                for (int d = 0; d < j; ++d)
                    v = v * sched.q + rng.next_below(static_cast<std::uint64_t>(sched.q));
                pt.symbols.push_back(v + 1);
            } else {
                pt.symbols.push_back(BigInt(1));
            }
            pt.m += j;
            pt.parity ^= 1;
        } else {
            pt.symbols.push_back(BigInt(0));
        }
    }
    return pt;
}

bool point_in_predicate(const SampledPoint& pt, const StatPredicate& sp) {
    for (const auto& pin : sp.pins) {
        const bool is_zero = pt.symbols[static_cast<std::size_t>(pin.level - 1)] == 0;
        if (is_zero != pin.zero) return false;
    }
    if (sp.wlo && Rational(pt.m) < *sp.wlo) return false;
    if (sp.whi && Rational(pt.m) > *sp.whi) return false;
    if (sp.parity && pt.parity != *sp.parity) return false;
    return true;
}

bool point_in_cylinders(const SampledPoint& pt, const std::vector<Cylinder>& cyls) {
    for (const Cylinder& c : cyls) {
        bool ok = true;
        for (const auto& [level, set] : c.constraints) {
            if (!set.contains(pt.symbols[static_cast<std::size_t>(level - 1)])) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

} // namespace

KsetResult k_set_measure(const BaseSchedule& sched, const KsetB& b, double s, double delta,
                         int depth, KsetRelation relation, RunMode mode,
                         std::uint64_t state_budget, std::uint64_t mc_samples,
                         std::uint64_t seed, int workers) {
    if (depth < 1 || depth > sched.depth)
        throw ConfigError("k_set_measure: depth outside the materialized schedule");
    if (workers < 1) throw ConfigError("k_set_measure: workers must be >= 1");
    const CocycleWindow w = cocycle_window(sched.q, s, delta);
    const std::int64_t wsum = static_cast<std::int64_t>(depth) * (depth + 1) / 2;

    KsetResult res;
    res.borderline = w.borderline;

    const bool is_cylinders = std::holds_alternative<std::vector<Cylinder>>(b);
    const StatPredicate sp = std::holds_alternative<StatPredicate>(b)
                                 ? std::get<StatPredicate>(b)
                                 : whole_space_predicate(depth);
    if (std::holds_alternative<StatPredicate>(b)) require_full_coverage(sp, depth);

    bool run_exact = mode != RunMode::monte_carlo;
    if (run_exact && is_cylinders) {
        try {
            const auto& cyls = std::get<std::vector<Cylinder>>(b);
            const auto disjoint = disjointify(sched, cyls, wsum, state_budget);
            const ClassMasses cm = class_masses(sched, disjoint, depth);
            const OccupancyPrefix occ = occupancy_from_masses(cm);
            Rational total{0};
            for (std::int64_t m = 0; m <= cm.wsum; ++m)
                for (int p = 0; p < 2; ++p) {
                    const auto& mass = cm.mass[static_cast<std::size_t>(m)][
                        static_cast<std::size_t>(p)];
                    if (mass == 0) continue;
                    if (partner_in_occupancy(occ, m, p, w, relation, std::nullopt, 0, cm.wsum))
                        total += mass;
                }
            res.exact = true;
            res.measure = total;
            res.estimate = rational_double(total);
            return res;
        } catch (const BudgetExceeded&) {
            if (mode == RunMode::exact) throw;
            run_exact = false; // fall through to Monte Carlo
        }
    } else if (run_exact) {
        const WeightedParityTable t = build_table(sp.free_lo, sp.free_hi);
        res.exact = true;
        res.measure = exact_predicate_kset(t, sp, w, relation);
        res.estimate = rational_double(res.measure);
        return res;
    }

    // Monte Carlo: sampled membership, exact partner occupancy.
    OccupancyPrefix occ;
    std::optional<WeightedParityTable> table;
    std::pair<std::int64_t, std::int64_t> clip{0, wsum};
    std::optional<int> forced_parity;
    if (is_cylinders) {
        occ = occupancy_from_cylinders(sched, std::get<std::vector<Cylinder>>(b), depth);
    } else {
        table = build_table(sp.free_lo, sp.free_hi);
        occ = occupancy_from_table(*table);
        const auto fw = sp.free_window();
        clip = fw;
        forced_parity = sp.free_parity();
    }

    std::vector<char> materialize(static_cast<std::size_t>(depth), 0);
    if (is_cylinders)
        for (const Cylinder& c : std::get<std::vector<Cylinder>>(b))
            for (const auto& [level, set] : c.constraints)
                if (level >= 1 && level <= depth)
                    materialize[static_cast<std::size_t>(level - 1)] = 1;

    constexpr std::uint64_t kShards = 64;
    std::vector<std::uint64_t> shard_hits(kShards, 0), shard_n(kShards, 0);
    const auto run_shard = [&](std::uint64_t shard) {
        const std::uint64_t n = mc_samples / kShards + (shard < mc_samples % kShards ? 1 : 0);
        SplitMix64 rng = make_stream(seed, shard);
        std::uint64_t hits = 0;
        for (std::uint64_t it = 0; it < n; ++it) {
            const SampledPoint pt = sample_point(sched, depth, materialize, rng);
            bool member;
            std::int64_t free_m = pt.m;
            int free_p = pt.parity;
            if (is_cylinders) {
                member = point_in_cylinders(pt, std::get<std::vector<Cylinder>>(b));
            } else {
                member = point_in_predicate(pt, sp);
                free_m = pt.m - sp.pin_m();
                free_p = pt.parity ^ sp.pin_parity();
            }
            if (member && partner_in_occupancy(occ, free_m, free_p, w, relation, forced_parity,
                                               clip.first, clip.second))
                ++hits;
        }
        shard_hits[shard] = hits;
        shard_n[shard] = n;
    };

    if (workers <= 1) {
        for (std::uint64_t shard = 0; shard < kShards; ++shard) run_shard(shard);
    } else {
        std::vector<std::thread> pool;
        const int nthreads = std::min<int>(workers, static_cast<int>(kShards));
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&, t] {
                for (std::uint64_t shard = static_cast<std::uint64_t>(t); shard < kShards;
                     shard += static_cast<std::uint64_t>(nthreads))
                    run_shard(shard);
            });
        for (auto& th : pool) th.join();
    }

    std::uint64_t hits = 0, n = 0;
    for (std::uint64_t shard = 0; shard < kShards; ++shard) {
        hits += shard_hits[shard];
        n += shard_n[shard];
    }
    res.exact = false;
    res.samples = n;
    res.estimate = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    res.half_ci =
        n ? 1.96 * std::sqrt(std::max(0.0, res.estimate * (1.0 - res.estimate)) /
                             static_cast<double>(n))
          : 0.0;
    return res;
}

std::vector<RatioScanRow> ratio_scan(const std::vector<std::pair<int, int>>& windows,
                                     const std::vector<std::int64_t>& r_values) {
    for (const std::int64_t r : r_values)
        if (r == 0) throw ConfigError("ratio_scan: probe cocycle r must be nonzero");
    std::vector<RatioScanRow> rows;
    for (const auto& [lo, hi] : windows) {
        if (lo < 1 || hi < lo) throw ConfigError("ratio_scan: bad window");
        const WeightedParityTable t = build_table(lo, hi);
        for (const std::int64_t r : r_values) {
            BigInt hits{0};
            for (std::int64_t m = 0; m <= t.wsum; ++m)
                for (int p = 0; p < 2; ++p) {
                    if (!t.occupied(m, p)) continue;
                    const std::int64_t m2 = m - r;
                    if (m2 >= 0 && m2 <= t.wsum && t.occupied(m2, p)) hits += t.count(m, p);
                }
            rows.push_back({lo, hi, r, Rational(hits, t.total())});
        }
    }
    return rows;
}

double ks_gaussian(std::int64_t q, int i) {
    (void)q; // the pattern law does not depend on q
    if (i < 2) throw ConfigError("ks_gaussian: depth must be >= 2");
    const WeightedParityTable t = build_table(1, i);
    const double mean = static_cast<double>(t.wsum) / 2.0;
    const double var =
        static_cast<double>(i) * (i + 1.0) * (2.0 * i + 1.0) / 6.0 / 4.0; // sum j^2 / 4
    const double sigma = std::sqrt(var);

    double ks = 0.0;
    double below = 0.0;
    for (std::int64_t m = 0; m <= t.wsum; ++m) {
        const double at = rational_double(t.mass_range(0, m, std::nullopt));
        const double z = (static_cast<double>(m) - mean) / sigma;
        const double phi = 0.5 * std::erfc(-z / std::sqrt(2.0));
        ks = std::max(ks, std::fabs(phi - below));
        ks = std::max(ks, std::fabs(phi - at));
        below = at;
    }
    return ks;
}

} // namespace parodo
