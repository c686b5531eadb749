#include "parodo/krieger.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace parodo {

namespace {

std::string fstr(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::string word_note(const std::vector<std::int64_t>& word, int lo) {
    std::ostringstream os;
    int shown = 0;
    for (std::size_t k = 0; k < word.size(); ++k) {
        if (word[k] == 0) continue;
        if (shown == 8) {
            os << ",...";
            break;
        }
        if (shown) os << ",";
        os << (lo + static_cast<int>(k));
        ++shown;
    }
    if (shown == 0) return "no nonzero levels";
    return "nonzero levels " + os.str();
}

int word_parity(const std::vector<std::int64_t>& word) {
    int p = 0;
    for (const std::int64_t v : word)
        if (v != 0) p ^= 1;
    return p;
}

Rational full_window_mass(int ik, const Rational& rho, const Rational& b) {
    const WeightedParityTable t = build_table(1, ik);
    const Rational center(t.wsum, 2);
    const Rational half(1, 2);
    return t.mass_range(rational_ceil_i64(center + (rho - half) * b),
                        rational_floor_i64(center + (rho + half) * b), std::nullopt);
}

} // namespace

ProofReport replay_proof(const ReplayConfig& cfg) {
    std::vector<Defect> defects = cfg.defects;
    if (defects.empty()) {
        Defect d;
        d.full_block = true;
        d.tail = DefectTail{129, SymbolSet::single(BigInt(1))};
        defects.push_back(std::move(d));
    }
    for (const Defect& d : defects)
        if (!d.full_block)
            throw ConfigError("replay: defects must be full-block (uniform density)");

    ProofContext ctx = make_proof_context(cfg.q, cfg.beta, cfg.I, cfg.u, defects, cfg.delta);

    std::vector<int> ks = cfg.ks;
    if (cfg.ik_override) ks = {*cfg.ik_override};
    if (ks.empty()) throw ConfigError("replay: empty depth scan list");
    for (const int ik : ks)
        if (ik <= ctx.I)
            throw ConfigError("replay: scan depth " + std::to_string(ik) +
                              " does not exceed I = " + std::to_string(ctx.I));
    if (cfg.rho_override && (*cfg.rho_override < -1 || *cfg.rho_override > 1))
        throw ConfigError("replay: rho override outside [-1, 1]");

    int sched_depth = *std::max_element(ks.begin(), ks.end());
    for (const Defect& d : ctx.defects) {
        if (d.tail && d.tail->level <= sched_depth)
            throw ConfigError("replay: defect tail level " + std::to_string(d.tail->level) +
                              " lies inside the scan range");
        if (d.tail) sched_depth = std::max(sched_depth, d.tail->level);
    }
    const BaseSchedule sched(ctx.q, sched_depth);
    const BSpec bspec{ctx.u, ctx.defects};
    const Rational xi = ctx.xi;
    const double lnq = log_base(ctx.q);

    ProofReport rep;
    bool ok = true;
    const auto add = [&](const std::string& label, const std::string& lhs,
                         const std::string& rhs, bool exact, bool pass, bool borderline,
                         const std::string& note) {
        rep.stages.push_back(
            {label, lhs, rhs, exact ? "exact-rational" : "guarded-float", pass, borderline, note});
        if (!pass && rep.failure.empty()) rep.failure = label;
        ok = ok && pass;
    };
    const auto finish = [&]() -> ProofReport& {
        rep.complete = ok;
        rep.ctx = ctx;
        return rep;
    };

    // Lemma hypothesis: B nearly fills Z_u.
    const Rational dens = uniform_density(sched, bspec);
    const Rational dens_thr = 1 - xi / 128;
    add("hypothesis", rational_str(dens), rational_str(dens_thr), true, dens > dens_thr, false,
        "density of B inside Z_u vs 1 - xi/128");
    if (!ok) return finish();

    ScaleSequence seq;
    try {
        seq = choose_scale_sequence(ctx.q, ctx.beta, ks);
    } catch (const NoFeasibleScale& e) {
        add("(2)", "-", "-", true, false, false, e.what());
        return finish();
    } catch (const WindowMassTooSmall& e) {
        add("(7)", "-", "-", true, false, false, e.what());
        return finish();
    }
    if (cfg.rho_override) {
        for (auto& cand : seq.candidates) {
            cand.rho = *cfg.rho_override;
            cand.window_mass = full_window_mass(cand.ik, cand.rho, cand.b);
        }
    }

    // Scan for the first depth passing the scale and window-mass gates.
    int chosen = -1;
    for (std::size_t idx = 0; idx < seq.candidates.size(); ++idx) {
        const ScaleCandidate& cand = seq.candidates[idx];
        ctx.ik = cand.ik;
        ctx.rho = cand.rho;
        ctx.b = cand.b;
        const double b_lnq = rational_double(cand.b) * lnq;
        const GuardedCompare g8 = guarded_less(std::exp(ctx.M + 1.0), b_lnq);

        SearchTrace tr;
        tr.ik = cand.ik;
        tr.pass8 = g8.holds;
        if (g8.holds) {
            const WeightedParityTable bt = build_table(ctx.I + 1, ctx.ik);
            const GammaSets g = gamma_sets(ctx, bt);
            tr.pass10 = g.mu_gamma > xi / 4;
            tr.pass11 = g.mu_gamma_minus >= xi && g.mu_gamma_plus >= xi;
            if (!tr.pass10)
                tr.note = "WindowMassTooSmall";
            else if (!tr.pass11)
                tr.note = "tail mass below xi";
        } else {
            tr.note = "ScaleTooSmall; window gates not evaluated";
        }
        rep.search.push_back(tr);
        if (tr.pass8 && tr.pass10 && tr.pass11) {
            chosen = static_cast<int>(idx);
            break;
        }
    }

    // Assemble the stage chain for the chosen depth (or the last attempt).
    const std::size_t ci =
        chosen >= 0 ? static_cast<std::size_t>(chosen) : seq.candidates.size() - 1;
    const KriegerScaling& sc = seq.scalings[ci];
    const ScaleCandidate& cand = seq.candidates[ci];
    ctx.ik = cand.ik;
    ctx.rho = cand.rho;
    ctx.b = cand.b;

    {
        std::ostringstream bs;
        for (std::size_t i = 0; i < seq.scalings.size(); ++i)
            bs << (i ? ", " : "") << rational_str(seq.scalings[i].b);
        add("(1)", "b = [" + bs.str() + "] (logq units)", "strictly increasing along the scan",
            true, seq.strictly_increasing, false,
            cfg.ik_override ? "forced depth scan" : "finite witness of sup b = infinity");
        if (!ok) return finish();
    }
    add("(2)", rational_str(sc.p_interior), rational_str(1 - 2 * ctx.beta), true,
        sc.cond_interior, false, "P(|stat| <= b) vs 1 - 2 beta at i(k)");
    if (!ok) return finish();
    add("(3)", rational_str(sc.p_upper), rational_str(ctx.beta), true, sc.cond_upper, false,
        "P(stat >= b) vs beta at i(k)");
    if (!ok) return finish();
    add("(4)", rational_str(sc.p_lower), rational_str(ctx.beta), true, sc.cond_lower, false,
        "P(stat <= -b) vs beta at i(k)");
    if (!ok) return finish();
    add("(5)", "i(k) = " + std::to_string(ctx.ik), "b(i(k)) -> infinity along the scan", true,
        seq.strictly_increasing, false, "witnessed by (1) on the scanned depths");
    if (!ok) return finish();
    add("(6)", rational_str(cand.mass_pm1), rational_str(xi), true, cand.mass_pm1 >= xi, false,
        "closed [-1, 1] mass of stat/b, full-range law");
    if (!ok) return finish();
    add("(7)", rational_str(cand.window_mass), rational_str(xi / 3), true,
        cand.window_mass >= xi / 3, false, "rho = " + rational_str(cand.rho) +
        ", closed window of radius 1/2 around rho, full-range law");
    if (!ok) return finish();

    const WeightedParityTable block_table = build_table(ctx.I + 1, ctx.ik);
    const WeightedParityTable rest_table = build_table(ctx.I + 2, ctx.ik);
    ctx.anchor_parity = 0;
    GammaSets gs = gamma_sets(ctx, block_table);

    add("(7bis)", rational_str(gs.mu_gamma), rational_str(cand.window_mass), true, true, false,
        "same window over the block law vs the full-range law (informational)");

    {
        const double lhs = std::exp(ctx.M - 2.0);
        const double rhs = (ctx.I + 1) * lnq;
        const GuardedCompare g = guarded_less(rhs, lhs);
        add("(7trei)", fstr(lhs), fstr(rhs), false, g.holds && ctx.M > 1.0, g.borderline,
            "e^(M-2) > (I+1) logq and M > 1, M = " + fstr(ctx.M));
        if (!ok) return finish();
    }
    {
        const double b_lnq = rational_double(ctx.b) * lnq;
        const GuardedCompare g = guarded_less(std::exp(ctx.M + 1.0), b_lnq);
        add("(8)", fstr(b_lnq), fstr(std::exp(ctx.M + 1.0)), false, g.holds, g.borderline,
            g.holds ? "b(i(k)) logq > e^(M+1)" : "ScaleTooSmall");
        if (!ok) return finish();
    }
    {
        const std::int64_t wi = static_cast<std::int64_t>(ctx.I) * (ctx.I + 1) / 2;
        const LogAffine diff{Rational(-4 * ctx.I), ctx.b - 4 * Rational(wi)};
        add("(9)", rational_str(ctx.b) + " logq",
            "4*(" + std::to_string(ctx.I) + " log2 + " + std::to_string(wi) + " logq)", true,
            logaffine_sign(diff, ctx.q) > 0, false,
            "strengthened form: b(i(k)) beats 4x the total log-measure spread over [1, I]");
        if (!ok) return finish();
        add("(9-literal)", rational_str(ctx.b) + " logq", "non-positive as printed", true, true,
            false,
            "the printed right side is at most zero while b(i(k)) > 0, so the display holds; "
            "the strengthened form above is the one later stages rely on");
    }
    add("(10)", rational_str(gs.mu_gamma), rational_str(xi / 4), true, gs.mu_gamma > xi / 4,
        false, gs.mu_gamma > xi / 4 ? "mu(Z_Gamma) over the block law" : "WindowMassTooSmall");
    if (!ok) return finish();
    add("(11)",
        "mu(Gamma-) = " + rational_str(gs.mu_gamma_minus) +
            ", mu(Gamma+) = " + rational_str(gs.mu_gamma_plus),
        rational_str(xi), true, gs.mu_gamma_minus >= xi && gs.mu_gamma_plus >= xi, false,
        "both tails beyond 3b/4 carry mass at least xi");
    if (!ok) return finish();

    ExtremePair ext;
    try {
        ext = select_extremes(ctx, gs, block_table);
    } catch (const Error& e) {
        add("(12)", "-", "-", true, false, false, e.what());
        return finish();
    }
    ctx.vminus = ext.vminus;
    ctx.vplus = ext.vplus;
    rep.mirrored = ctx.rho < 0;
    const std::vector<std::int64_t>& anchor_word = rep.mirrored ? ext.vplus : ext.vminus;
    const std::int64_t anchor_m = rep.mirrored ? ext.m_plus : ext.m_minus;
    ctx.anchor_parity = word_parity(anchor_word);
    add("(12)",
        "m(v-) = " + std::to_string(ext.m_minus) + ", m(v+) = " + std::to_string(ext.m_plus),
        "representatives exist in both tails", true, true, false,
        std::string("anchor = ") + (rep.mirrored ? "v+ (mirrored branch), " : "v-, ") +
            word_note(anchor_word, ctx.I + 1));

    gs = gamma_sets(ctx, block_table); // parity classes relative to the anchor
    ctx.sets = gs;

    add("(13)",
        "density(v-) = " + rational_str(ext.density_minus) +
            ", density(v+) = " + rational_str(ext.density_plus),
        "3/4", true,
        ext.density_minus > Rational(3, 4) && ext.density_plus > Rational(3, 4), false,
        "B-density at the extreme words after refinement");
    if (!ok) return finish();

    add("(14)",
        "Psi = [" + rational_str(*gs.psi.wlo) + ", " + rational_str(*gs.psi.whi) + "]",
        "Gamma widened by (I+1) logq on both sides", true,
        stat_predicate_subset(gs.gamma, gs.psi), false,
        "Gamma = [" + rational_str(*gs.gamma.wlo) + ", " + rational_str(*gs.gamma.whi) +
            "] in m units");
    if (!ok) return finish();

    const Rational wb_half(ctx.block_wsum(), 2);
    Rational es = Rational(anchor_m) - wb_half;
    if (es < 0) es = -es;
    ctx.es = es;
    ctx.s = std::log(rational_double(es) * lnq);
    add("(15)", "e^s = " + rational_str(es) + " (logq units)", "> 0", true, es > 0, false,
        "s = log|sum of anchor log-measures minus block centering| = " + fstr(ctx.s));
    if (!ok) return finish();

    add("(16)", rational_str(es), rational_str(Rational(3, 4) * ctx.b), true,
        es >= Rational(3, 4) * ctx.b, false, "e^s >= (3/4) b(i(k)), both in logq units");
    if (!ok) return finish();

    {
        const GuardedCompare g = guarded_less(ctx.M, ctx.s);
        add("(17)", fstr(ctx.s), fstr(ctx.M), false, g.holds, g.borderline, "s > M");
        if (!ok) return finish();
    }

    CaseSplitResult cs;
    try {
        cs = case_split(ctx, gs, block_table, rest_table);
    } catch (const CaseSplitFailed& e) {
        add("case", "-", "-", true, false, false, e.what());
        return finish();
    }
    ctx.e_components = cs.e_components;
    rep.case_branch = cs.case_branch;
    add("case",
        "mu(Gamma inter V0) = " + rational_str(cs.mu_gamma_v0) +
            ", mu(Gamma inter V1) = " + rational_str(cs.mu_gamma_v1),
        rational_str(xi / 16), true, cs.contained && cs.mu_e > xi / 16, false,
        "case " + std::string(cs.case_branch == 1 ? "I" : "II") + "; E has " +
            std::to_string(cs.e_components.size()) + " component(s), containment certified");
    if (!ok) return finish();

    if (cs.case_branch == 2) {
        add("(18bis)", rational_str(cs.mu_e), rational_str(3 * xi / 16), true,
            cs.mu_e > 3 * xi / 16, false, "head-swapped set keeps the V1 mass exactly");
        if (!ok) return finish();
        add("(18trei)", "E", "subset of Psi inter V0", true, cs.contained, false,
            "head swap moves the statistic by exactly (I+1) logq, absorbed by Psi");
        if (!ok) return finish();
    }

    LemmaCertificate cert;
    bool kept_all = false;
    try {
        cert = lemma_refine_uniform(sched, xi, bspec, cs.mu_e, &kept_all);
    } catch (const HypothesisViolated& e) {
        add("(18)", "-", "-", true, false, false, e.what());
        return finish();
    }
    ctx.e0_components = kept_all ? ctx.e_components : std::vector<StatPredicate>{};
    add("(18)", rational_str(cert.mu_e0), rational_str(xi / 32), true,
        cert.holds && kept_all && cert.mu_e0 > xi / 32, false,
        "uniform B-density " + rational_str(dens) +
            " > 3/4 keeps every E word; mu(Z_E0) vs xi/32");
    if (!ok) return finish();

    add("(19)", rational_str(dens), "1/2", true, dens > Rational(1, 2), false,
        "mu(B inter Z_v inter S_v(B inter Z_anchor)) = density * mu(Z_u) * mu(Z_v) per word");
    if (!ok) return finish();

    // Cocycle window over E0: every occupied |m - m_anchor| must fall inside
    // (e^(s-delta), e^(s+delta)), and the orientation must be uniform.
    {
        std::optional<std::int64_t> gmin, gmax;
        bool orient_ok = true;
        for (const StatPredicate& comp : ctx.e0_components) {
            const WeightedParityTable& t =
                comp.free_lo == block_table.lo ? block_table : rest_table;
            const auto gap = stat_predicate_abs_gap(comp, t, anchor_m);
            if (!gap) continue;
            gmin = gmin ? std::min(*gmin, gap->first) : gap->first;
            gmax = gmax ? std::max(*gmax, gap->second) : gap->second;
            const auto fw = comp.free_window();
            const std::int64_t lo_total = comp.pin_m() + fw.first;
            const std::int64_t hi_total = comp.pin_m() + fw.second;
            if (rep.mirrored ? hi_total >= anchor_m : lo_total <= anchor_m) orient_ok = false;
        }
        const double dv = rational_double(ctx.delta);
        const double lo_bound = rational_double(es) * std::exp(-dv);
        const double hi_bound = rational_double(es) * std::exp(dv);
        bool pass21 = false, borderline21 = false;
        std::string lhs = "E0 empty";
        if (gmin) {
            const GuardedCompare glo = guarded_less(lo_bound, static_cast<double>(*gmin));
            const GuardedCompare ghi = guarded_less(static_cast<double>(*gmax), hi_bound);
            pass21 = orient_ok && glo.holds && ghi.holds;
            borderline21 = glo.borderline || ghi.borderline;
            lhs = "|dm| in [" + std::to_string(*gmin) + ", " + std::to_string(*gmax) + "]";
        }
        add("(21)", lhs, "(" + fstr(lo_bound) + ", " + fstr(hi_bound) + ") (logq units)", false,
            pass21, borderline21,
            orient_ok ? "transported cocycles all on the positive side of the anchor"
                      : "orientation not uniform across E0");
        if (!ok) return finish();
    }

    add("(20)", "E0", "subset of K(B, s, delta)", true, true, false,
        "certified by (19), the window bounds of (21), and the V0 parity pin");

    {
        const Rational lb = cert.mu_zu * dens * cert.mu_e0;
        const Rational mid = cert.mu_zu * xi / 64;
        const Rational rhs = ctx.eta * cert.mu_b;
        add("final", rational_str(lb), rational_str(rhs), true, lb > mid && mid >= rhs, false,
            "mu(K inter B) >= density * mu(Z_u) * mu(Z_E0) > mu(Z_u) xi/64 >= eta mu(B), eta = "
            "xi/64 = " + rational_str(ctx.eta));
    }
    return finish();
}

DensityResult density_cylinder(const BaseSchedule& sched, const std::vector<Cylinder>& a,
                               const Rational& xi, int max_depth, std::uint64_t budget) {
    if (max_depth < 0 || max_depth > sched.depth)
        throw ConfigError("density_cylinder: max_depth outside the materialized schedule");
    const Rational thr = 1 - xi / 128;
    Rational best{-1};
    std::uint64_t examined = 0;

    for (int dlen = 0; dlen <= max_depth; ++dlen) {
        std::vector<std::int64_t> sizes;
        for (int j = 1; j <= dlen; ++j) sizes.push_back(sched.level_max_i64(j) + 1);
        std::vector<std::int64_t> word(static_cast<std::size_t>(dlen), 0);
        for (;;) {
            if (++examined > budget)
                throw BudgetExceeded("density_cylinder: prefix budget " +
                                     std::to_string(budget) + " exhausted; best density " +
                                     rational_str(best));
            const Prefix u{word};
            const Rational mu_zu = prefix_measure(sched, u);
            std::vector<Cylinder> restricted;
            for (const Cylinder& c : a) {
                Cylinder rc = c;
                bool empty = false;
                for (int j = 1; j <= dlen; ++j) {
                    const SymbolSet want = SymbolSet::single(BigInt(word[static_cast<std::size_t>(j - 1)]));
                    const SymbolSet* cur = rc.find(j);
                    const SymbolSet inter = cur ? set_intersect(*cur, want) : want;
                    if (inter.is_empty()) {
                        empty = true;
                        break;
                    }
                    rc.restrict_level(j, inter);
                }
                if (!empty && !rc.has_empty_constraint()) restricted.push_back(std::move(rc));
            }
            const Rational inter_mass =
                restricted.empty() ? Rational(0) : cylinder_union_measure(sched, restricted);
            const Rational density = inter_mass / mu_zu;
            if (density > best) best = density;
            if (density > thr) return {u, restricted, density};

            int pos = dlen - 1;
            while (pos >= 0 && word[static_cast<std::size_t>(pos)] ==
                                   sizes[static_cast<std::size_t>(pos)] - 1) {
                word[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++word[static_cast<std::size_t>(pos)];
        }
    }
    throw NotFoundError("density_cylinder: no prefix up to depth " + std::to_string(max_depth) +
                        " reaches density > " + rational_str(thr) + "; best " +
                        rational_str(best));
}

} // namespace parodo
