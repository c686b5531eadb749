#include "parodo/krieger.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace parodo {

namespace {

std::int64_t floor_div2(std::int64_t a) {
    return a >= 0 ? a / 2 : -((-a + 1) / 2);
}

std::int64_t ceil_div2(std::int64_t a) {
    return a >= 0 ? (a + 1) / 2 : -((-a) / 2);
}

std::int64_t range_wsum(int lo, int hi) {
    if (hi < lo) return 0;
    const std::int64_t h = hi, l = lo;
    return (h * (h + 1) - (l - 1) * l) / 2;
}

} // namespace

LogAffine centering(std::int64_t q, int i) {
    (void)q;
    if (i < 0) throw ConfigError("centering: negative depth");
    return LogAffine{Rational(-i), Rational(-range_wsum(1, i), 2)};
}

KriegerScaling scaling_from_table(std::int64_t q, const WeightedParityTable& t,
                                  const Rational& beta) {
    if (beta <= 0) throw ConfigError("scaling: beta must be positive");
    if (beta > Rational(1, 2))
        throw NoFeasibleScale("scaling: beta > 1/2 leaves no upper quantile");
    const std::int64_t w = t.wsum;

    // P(stat >= (T/2) logq) = P(2m - w >= T) = P(m >= ceil((w+T)/2)).
    const auto upper_mass = [&](std::int64_t tt) {
        return t.mass_range(ceil_div2(w + tt), w, std::nullopt);
    };
    if (upper_mass(1) < beta)
        throw NoFeasibleScale("scaling: no half-lattice value has upper tail >= beta (i=" +
                              std::to_string(t.hi) + ")");
    std::int64_t lo = 1, hi = w + 2; // upper_mass(w+2) = 0 < beta
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (upper_mass(mid) >= beta)
            lo = mid;
        else
            hi = mid;
    }

    KriegerScaling s;
    s.i = t.hi;
    s.beta = beta;
    s.c = centering(q, t.hi >= t.lo ? t.hi : 0);
    s.b = Rational(lo, 2);
    s.p_upper = upper_mass(lo);
    s.p_lower = t.mass_range(0, floor_div2(w - lo), std::nullopt);
    s.p_interior = t.mass_range(ceil_div2(w - lo), floor_div2(w + lo), std::nullopt);
    s.cond_upper = s.p_upper >= beta;
    s.cond_lower = s.p_lower >= beta;
    s.cond_interior = s.p_interior >= 1 - 2 * beta;
    return s;
}

KriegerScaling scaling(std::int64_t q, int i, const Rational& beta) {
    if (i < 0) throw ConfigError("scaling: negative depth");
    const WeightedParityTable t = build_table(1, i);
    return scaling_from_table(q, t, beta);
}

ScaleSequence choose_scale_sequence(std::int64_t q, const Rational& beta,
                                    const std::vector<int>& ks) {
    if (ks.empty()) throw ConfigError("choose_scale_sequence: empty depth list");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1) throw ConfigError("choose_scale_sequence: depths must be >= 1");
        if (i > 0 && ks[i] <= ks[i - 1])
            throw ConfigError("choose_scale_sequence: depths must be strictly increasing");
    }
    const Rational xi = std::min(beta, Rational(1 - 2 * beta));

    ScaleSequence seq;
    seq.strictly_increasing = true;
    Rational best_any{-1};
    for (const int ik : ks) {
        const WeightedParityTable t = build_table(1, ik);
        KriegerScaling sc = scaling_from_table(q, t, beta);
        if (!seq.scalings.empty() && sc.b <= seq.scalings.back().b)
            seq.strictly_increasing = false;

        const Rational center(t.wsum, 2);
        const Rational half(1, 2);
        ScaleCandidate cand;
        cand.ik = ik;
        cand.b = sc.b;
        cand.window_mass = -1;
        // Grid order encodes the tie-break: smaller |rho| first, nonnegative first.
        for (int j = 0; j <= 16; ++j) {
            const int signed_j = (j + 1) / 2 * ((j % 2) ? 1 : -1); // 0,1,-1,2,-2,...
            const Rational rho(signed_j, 8);
            const Rational wlo = center + (rho - half) * sc.b;
            const Rational whi = center + (rho + half) * sc.b;
            const Rational mass =
                t.mass_range(rational_ceil_i64(wlo), rational_floor_i64(whi), std::nullopt);
            if (mass > cand.window_mass) {
                cand.window_mass = mass;
                cand.rho = rho;
            }
        }
        cand.mass_pm1 = t.mass_range(rational_ceil_i64(center - sc.b),
                                     rational_floor_i64(center + sc.b), std::nullopt);
        best_any = std::max(best_any, cand.window_mass);
        seq.candidates.push_back(cand);
        seq.scalings.push_back(std::move(sc));
    }
    if (xi > 0 && best_any * 3 < xi)
        throw WindowMassTooSmall("choose_scale_sequence: best grid window mass " +
                                 rational_str(best_any) + " below xi/3 = " +
                                 rational_str(xi / 3) + " at every depth");
    return seq;
}

std::int64_t StatPredicate::pin_m() const {
    std::int64_t m = 0;
    for (const Pin& p : pins)
        if (!p.zero) m += p.level;
    return m;
}

int StatPredicate::pin_parity() const {
    int p = 0;
    for (const Pin& pin : pins)
        if (!pin.zero) p ^= 1;
    return p;
}

std::int64_t StatPredicate::free_wsum() const { return range_wsum(free_lo, free_hi); }

std::pair<std::int64_t, std::int64_t> StatPredicate::free_window() const {
    std::int64_t lo = 0, hi = free_wsum();
    const std::int64_t pm = pin_m();
    if (wlo) lo = std::max(lo, rational_ceil_i64(*wlo - pm));
    if (whi) hi = std::min(hi, rational_floor_i64(*whi - pm));
    return {lo, hi};
}

std::optional<int> StatPredicate::free_parity() const {
    if (!parity) return std::nullopt;
    return (*parity ^ pin_parity()) & 1;
}

Rational stat_predicate_measure(const StatPredicate& sp, const WeightedParityTable& free_table) {
    if (free_table.lo != sp.free_lo || free_table.hi != sp.free_hi)
        throw Error("stat_predicate_measure: table covers [" + std::to_string(free_table.lo) +
                    "," + std::to_string(free_table.hi) + "], predicate frees [" +
                    std::to_string(sp.free_lo) + "," + std::to_string(sp.free_hi) + "]");
    const auto fw = sp.free_window();
    if (fw.first > fw.second) return Rational(0);
    const Rational mass = free_table.mass_range(fw.first, fw.second, sp.free_parity());
    return mass / Rational(bigint_pow(BigInt(2), sp.pins.size()));
}

namespace {

std::vector<int> predicate_levels(const StatPredicate& sp) {
    std::vector<int> levels;
    for (const auto& p : sp.pins) levels.push_back(p.level);
    for (int j = sp.free_lo; j <= sp.free_hi; ++j) levels.push_back(j);
    std::sort(levels.begin(), levels.end());
    return levels;
}

} // namespace

bool stat_predicate_subset(const StatPredicate& inner, const StatPredicate& outer) {
    if (predicate_levels(inner) != predicate_levels(outer)) return false;
    const auto fw = inner.free_window();
    if (fw.first > fw.second) return true; // empty event
    const std::int64_t lo = inner.pin_m() + fw.first;
    const std::int64_t hi = inner.pin_m() + fw.second;
    if (outer.wlo && Rational(lo) < *outer.wlo) return false;
    if (outer.whi && Rational(hi) > *outer.whi) return false;
    if (outer.parity) {
        if (!inner.parity || *inner.parity != *outer.parity) return false;
    }
    return true;
}

std::optional<std::pair<std::int64_t, std::int64_t>> stat_predicate_abs_gap(
    const StatPredicate& sp, const WeightedParityTable& free_table, std::int64_t anchor_m) {
    if (free_table.lo != sp.free_lo || free_table.hi != sp.free_hi)
        throw Error("stat_predicate_abs_gap: table range mismatch");
    const auto fw = sp.free_window();
    const auto fp = sp.free_parity();
    const std::int64_t pm = sp.pin_m();
    std::optional<std::pair<std::int64_t, std::int64_t>> out;
    for (std::int64_t m = std::max<std::int64_t>(0, fw.first);
         m <= std::min(fw.second, free_table.wsum); ++m) {
        const bool hit = fp ? free_table.occupied(m, *fp)
                            : (free_table.occupied(m, 0) || free_table.occupied(m, 1));
        if (!hit) continue;
        const std::int64_t gap = std::llabs(pm + m - anchor_m);
        if (!out)
            out = {gap, gap};
        else {
            out->first = std::min(out->first, gap);
            out->second = std::max(out->second, gap);
        }
    }
    return out;
}

Rational defect_tail_mass(const BaseSchedule& sched, const Defect& d) {
    if (!d.tail) return Rational(1);
    return symbol_set_measure(sched, d.tail->level, d.tail->set);
}

Rational uniform_density(const BaseSchedule& sched, const BSpec& b) {
    Rational d{1};
    for (const Defect& def : b.defects) {
        if (!def.full_block)
            throw ConfigError("uniform_density: defect with an explicit block part");
        d *= 1 - defect_tail_mass(sched, def);
    }
    return d;
}

Rational block_word_density(const BaseSchedule& sched, const BSpec& b,
                            const std::vector<std::int64_t>& word) {
    Rational d{1};
    for (const Defect& def : b.defects) {
        const bool covers =
            def.full_block ||
            std::binary_search(def.block_words.begin(), def.block_words.end(), word);
        if (covers) d *= 1 - defect_tail_mass(sched, def);
    }
    return d;
}

BlockEnumeration enumerate_block(const BaseSchedule& sched, int lo, int hi,
                                 std::uint64_t budget) {
    BlockEnumeration out;
    out.lo = lo;
    out.hi = hi;
    if (hi < lo) {
        out.words.push_back({});
        out.measures.push_back(Rational(1));
        return out;
    }
    BigInt count{1};
    std::vector<std::int64_t> sizes;
    for (int j = lo; j <= hi; ++j) {
        sizes.push_back(sched.level_max_i64(j) + 1);
        count *= sizes.back();
        if (count > BigInt(budget))
            throw BudgetExceeded("enumerate_block: " + count.str() + " words over budget " +
                                 std::to_string(budget));
    }
    const int width = hi - lo + 1;
    std::vector<std::int64_t> word(static_cast<std::size_t>(width), 0);
    for (;;) {
        Rational mu{1};
        for (int k = 0; k < width; ++k) mu *= symbol_measure(sched, lo + k, word[k]);
        out.words.push_back(word);
        out.measures.push_back(mu);
        int pos = width - 1;
        while (pos >= 0 && word[pos] == sizes[pos] - 1) {
            word[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++word[pos];
    }
    return out;
}

namespace {

void check_block_disjoint_from_u(const BSpec& b, int block_lo, int block_hi) {
    if (block_lo <= static_cast<int>(b.u.size()))
        throw ConfigError("lemma: block overlaps the u levels");
    for (const Defect& d : b.defects)
        if (d.tail && d.tail->level <= block_hi)
            throw ConfigError("lemma: defect tail level " + std::to_string(d.tail->level) +
                              " not beyond the block");
}

} // namespace

LemmaCertificate lemma_refine(const BaseSchedule& sched, const Rational& xi, const BSpec& b,
                              const BlockEnumeration& block,
                              const std::vector<std::uint32_t>& e_words,
                              std::vector<std::uint32_t>* e0_out) {
    check_block_disjoint_from_u(b, block.lo, block.hi);
    LemmaCertificate cert;
    cert.mu_zu = prefix_measure(sched, b.u);

    std::vector<Rational> density(block.words.size());
    Rational rel{0};
    for (std::size_t i = 0; i < block.words.size(); ++i) {
        density[i] = block_word_density(sched, b, block.words[i]);
        rel += block.measures[i] * density[i];
    }
    cert.mu_b = cert.mu_zu * rel;
    if (!(rel > 1 - xi / 128))
        throw HypothesisViolated("lemma_refine: mu(B) = " + rational_str(cert.mu_b) +
                                 " <= (1 - xi/128) mu(Z_u) = " +
                                 rational_str((1 - xi / 128) * cert.mu_zu));

    cert.mu_e = 0;
    for (const std::uint32_t idx : e_words) {
        if (idx >= block.words.size()) throw Error("lemma_refine: E index out of range");
        cert.mu_e += block.measures[idx];
    }
    if (!(cert.mu_e > xi / 16))
        throw HypothesisViolated("lemma_refine: mu(Z_E) = " + rational_str(cert.mu_e) +
                                 " <= xi/16 = " + rational_str(xi / 16));

    cert.mu_e0 = 0;
    if (e0_out) e0_out->clear();
    const Rational three_q(3, 4);
    for (const std::uint32_t idx : e_words) {
        if (density[idx] > three_q) {
            cert.mu_e0 += block.measures[idx];
            if (e0_out) e0_out->push_back(idx);
        }
    }
    cert.holds = 2 * cert.mu_e0 > cert.mu_e;
    return cert;
}

LemmaCertificate lemma_refine_uniform(const BaseSchedule& sched, const Rational& xi,
                                      const BSpec& b, const Rational& mu_e, bool* kept_all) {
    LemmaCertificate cert;
    cert.mu_zu = prefix_measure(sched, b.u);
    const Rational d = uniform_density(sched, b);
    cert.mu_b = cert.mu_zu * d;
    if (!(d > 1 - xi / 128))
        throw HypothesisViolated("lemma_refine_uniform: density " + rational_str(d) +
                                 " <= 1 - xi/128 = " + rational_str(1 - xi / 128));
    if (!(mu_e > xi / 16))
        throw HypothesisViolated("lemma_refine_uniform: mu(Z_E) = " + rational_str(mu_e) +
                                 " <= xi/16 = " + rational_str(xi / 16));
    cert.mu_e = mu_e;
    const bool keep = d > Rational(3, 4);
    cert.mu_e0 = keep ? mu_e : Rational(0);
    if (kept_all) *kept_all = keep;
    cert.holds = 2 * cert.mu_e0 > cert.mu_e;
    return cert;
}

std::int64_t ProofContext::block_wsum() const { return range_wsum(I + 1, ik); }

ProofContext make_proof_context(std::int64_t q, const Rational& beta, int I, Prefix u,
                                std::vector<Defect> defects, const Rational& delta) {
    if (q < 2) throw ConfigError("proof context: q must be >= 2");
    if (beta <= 0 || beta >= Rational(1, 2))
        throw ConfigError("proof context: beta must lie in (0, 1/2)");
    if (I < 1) throw ConfigError("proof context: I must be >= 1");
    if (static_cast<int>(u.size()) != I)
        throw ConfigError("proof context: u must have exactly I symbols");
    if (delta <= 0) throw ConfigError("proof context: delta must be positive");
    validate_prefix(BaseSchedule(q, I), u);

    std::set<int> tail_levels;
    for (Defect& d : defects) {
        std::sort(d.block_words.begin(), d.block_words.end());
        if (d.tail) {
            if (d.tail->level <= I)
                throw ConfigError("proof context: defect tail inside the u levels");
            if (!tail_levels.insert(d.tail->level).second)
                throw ConfigError("proof context: duplicate defect tail level " +
                                  std::to_string(d.tail->level));
        }
    }

    ProofContext ctx;
    ctx.q = q;
    ctx.beta = beta;
    ctx.xi = std::min(beta, Rational(1 - 2 * beta));
    ctx.eta = ctx.xi / 64;
    ctx.delta = delta;
    ctx.I = I;
    ctx.u = std::move(u);
    ctx.defects = std::move(defects);
    const double lnq = log_base(q);
    ctx.M = std::max(2.0 + std::log((I + 1) * lnq), 1.0) + 0.125;
    return ctx;
}

GammaSets gamma_sets(const ProofContext& ctx, const WeightedParityTable& block_table) {
    if (block_table.lo != ctx.I + 1 || block_table.hi != ctx.ik)
        throw Error("gamma_sets: table must cover the block [I+1, i(k)]");
    const Rational center(ctx.block_wsum(), 2);
    const Rational half(1, 2);
    const Rational quart(3, 4);
    const Rational t = ctx.b;

    GammaSets gs;
    StatPredicate base;
    base.free_lo = ctx.I + 1;
    base.free_hi = ctx.ik;

    gs.gamma = base;
    gs.gamma.wlo = center + (ctx.rho - half) * t;
    gs.gamma.whi = center + (ctx.rho + half) * t;

    gs.gamma_minus = base;
    gs.gamma_minus.whi = center - quart * t;

    gs.gamma_plus = base;
    gs.gamma_plus.wlo = center + quart * t;

    gs.psi = base;
    gs.psi.wlo = *gs.gamma.wlo - (ctx.I + 1);
    gs.psi.whi = *gs.gamma.whi + (ctx.I + 1);

    gs.v0 = base;
    gs.v0.parity = ctx.anchor_parity & 1;
    gs.v1 = base;
    gs.v1.parity = (ctx.anchor_parity ^ 1) & 1;

    gs.mu_gamma = stat_predicate_measure(gs.gamma, block_table);
    gs.mu_gamma_minus = stat_predicate_measure(gs.gamma_minus, block_table);
    gs.mu_gamma_plus = stat_predicate_measure(gs.gamma_plus, block_table);
    gs.mu_psi = stat_predicate_measure(gs.psi, block_table);
    gs.mu_v0 = stat_predicate_measure(gs.v0, block_table);
    gs.mu_v1 = stat_predicate_measure(gs.v1, block_table);
    return gs;
}

namespace {

BaseSchedule proof_schedule(const ProofContext& ctx) {
    int depth = std::max(ctx.ik, ctx.I);
    for (const Defect& d : ctx.defects)
        if (d.tail) depth = std::max(depth, d.tail->level);
    return BaseSchedule(ctx.q, depth);
}

std::int64_t word_weight(int lo, const std::vector<std::int64_t>& word) {
    std::int64_t m = 0;
    for (std::size_t k = 0; k < word.size(); ++k)
        if (word[k] != 0) m += lo + static_cast<std::int64_t>(k);
    return m;
}

} // namespace

ExtremePair select_extremes(const ProofContext& ctx, const GammaSets& gs,
                            const WeightedParityTable& block_table) {
    (void)block_table;
    const BaseSchedule sched = proof_schedule(ctx);
    const BSpec bspec{ctx.u, ctx.defects};

    bool kept = false;
    LemmaCertificate cm = lemma_refine_uniform(sched, ctx.xi, bspec, gs.mu_gamma_minus, &kept);
    if (!cm.holds || !kept)
        throw HypothesisViolated("select_extremes: refinement emptied the lower tail");
    LemmaCertificate cp = lemma_refine_uniform(sched, ctx.xi, bspec, gs.mu_gamma_plus, &kept);
    if (!cp.holds || !kept)
        throw HypothesisViolated("select_extremes: refinement emptied the upper tail");

    ExtremePair out;
    const auto wminus = gs.gamma_minus.free_window();
    out.vminus = lex_min_block_word(ctx.I + 1, ctx.ik, wminus.first, wminus.second, std::nullopt);
    const auto wplus = gs.gamma_plus.free_window();
    out.vplus = lex_min_block_word(ctx.I + 1, ctx.ik, wplus.first, wplus.second, std::nullopt);
    out.m_minus = word_weight(ctx.I + 1, out.vminus);
    out.m_plus = word_weight(ctx.I + 1, out.vplus);
    out.density_minus = block_word_density(sched, bspec, out.vminus);
    out.density_plus = block_word_density(sched, bspec, out.vplus);
    return out;
}

CaseSplitResult case_split(const ProofContext& ctx, const GammaSets& gs,
                           const WeightedParityTable& block_table,
                           const WeightedParityTable& rest_table) {
    const int p = ctx.anchor_parity & 1;

    StatPredicate g0 = gs.gamma;
    g0.parity = p;
    StatPredicate g1 = gs.gamma;
    g1.parity = p ^ 1;

    CaseSplitResult res;
    res.mu_gamma_v0 = stat_predicate_measure(g0, block_table);
    res.mu_gamma_v1 = stat_predicate_measure(g1, block_table);

    StatPredicate psi0 = gs.psi;
    psi0.parity = p;

    if (res.mu_gamma_v0 > ctx.xi / 16) {
        res.case_branch = 1;
        res.e_components = {g0};
        res.mu_e = res.mu_gamma_v0;
        res.contained = stat_predicate_subset(g0, psi0);
        return res;
    }

    res.case_branch = 2;
    if (!(res.mu_gamma_v1 > ctx.xi / 16))
        throw CaseSplitFailed("case_split: mu(Gamma inter V0) = " +
                              rational_str(res.mu_gamma_v0) + ", mu(Gamma inter V1) = " +
                              rational_str(res.mu_gamma_v1) + ", both at or below xi/16 = " +
                              rational_str(ctx.xi / 16));

    // Swap the level-(I+1) head of Gamma inter V1. The nonzero head moves the
    // statistic up by (I+1) logq and flips the pattern parity; the zero head
    // moves it down by the same amount.
    StatPredicate head_one;
    head_one.free_lo = ctx.I + 2;
    head_one.free_hi = ctx.ik;
    head_one.pins = {{ctx.I + 1, false}};
    head_one.wlo = *gs.gamma.wlo + (ctx.I + 1);
    head_one.whi = *gs.gamma.whi + (ctx.I + 1);
    head_one.parity = p;

    StatPredicate head_zero = head_one;
    head_zero.pins = {{ctx.I + 1, true}};
    head_zero.wlo = *gs.gamma.wlo - (ctx.I + 1);
    head_zero.whi = *gs.gamma.whi - (ctx.I + 1);

    const Rational mu_one = stat_predicate_measure(head_one, rest_table);
    const Rational mu_zero = stat_predicate_measure(head_zero, rest_table);
    res.mu_e = mu_one + mu_zero;
    if (res.mu_e != res.mu_gamma_v1)
        throw Error("case_split: head swap changed the measure (" + rational_str(res.mu_e) +
                    " vs " + rational_str(res.mu_gamma_v1) + ")");

    res.e_components = {head_zero, head_one};
    res.contained =
        stat_predicate_subset(head_zero, psi0) && stat_predicate_subset(head_one, psi0);
    return res;
}

} // namespace parodo
