#include "parodo/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "parodo/bratteli.hpp"
#include "parodo/dynamics.hpp"
#include "parodo/report.hpp"
#include "parodo/rng.hpp"

namespace parodo {

namespace {

std::string fstr(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string join_symbols(const std::vector<std::int64_t>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(v[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// orbit
// ---------------------------------------------------------------------------

int cmd_orbit(const RunConfig& rc, const nlohmann::ordered_json& flags) {
    const nlohmann::json sec = rc.section("orbit");
    int length = rc.depth ? *rc.depth : sec.value("L", 8);
    const std::uint64_t steps = sec.value("steps", std::uint64_t{100});
    std::vector<std::int64_t> start;
    if (sec.contains("start")) start = sec.at("start").get<std::vector<std::int64_t>>();
    if (static_cast<int>(start.size()) > length) length = static_cast<int>(start.size());
    if (length < 2) throw ConfigError("orbit: buffer length must be >= 2");
    start.resize(static_cast<std::size_t>(length), 0);
    const Point x0 = make_point(rc.q, start);

    ReportWriter w("orbit", rc.out_dir);
    w.config() = rc.common_echo();
    w.config()["orbit"] = {{"L", length}, {"steps", steps}, {"start", start}};
    w.flags() = flags;

    std::string csv = "step,prefix,cocycle_a,cocycle_b\n";
    bool overflow = false;
    std::uint64_t completed = 0;
    Point cur = x0;
    for (std::uint64_t k = 1; k <= steps; ++k) {
        try {
            cur = t_step(cur);
        } catch (const BufferOverflow&) {
            overflow = true;
            break;
        }
        const LogValue c = cocycle(x0, cur, length);
        csv += std::to_string(k) + "," + join_symbols(cur.buffer, ':') + "," +
               std::to_string(c.a) + "," + std::to_string(c.b) + "\n";
        ++completed;
    }
    w.write_file("orbit.csv", csv);
    w.outputs()["steps_requested"] = steps;
    w.outputs()["steps_completed"] = completed;
    w.outputs()["overflow_truncated"] = overflow;
    w.finalize();
    if (overflow)
        std::cerr << "warning: orbit truncated after " << completed
                  << " steps (carry left the buffer); partial dump written\n";
    return 0;
}

// ---------------------------------------------------------------------------
// dist
// ---------------------------------------------------------------------------

int cmd_dist(const RunConfig& rc, const nlohmann::ordered_json& flags) {
    const nlohmann::json sec = rc.section("dist");
    std::vector<int> depths;
    if (rc.depth)
        depths = {*rc.depth};
    else if (sec.contains("depths"))
        depths = sec.at("depths").get<std::vector<int>>();
    else
        depths = {1, 2, 3, 4, 6, 8};
    for (const int i : depths)
        if (i < 0 || i > 512) throw ConfigError("dist: depth must lie in [0, 512]");

    ReportWriter w("dist", rc.out_dir);
    w.config() = rc.common_echo();
    w.config()["dist"] = {{"depths", depths}};
    w.flags() = flags;

    std::string csv = "i,m,parity,count\n";
    auto rows = nlohmann::ordered_json::array();
    for (const int i : depths) {
        const WeightedParityTable t = build_table(1, i);
        for (std::int64_t m = 0; m <= t.wsum; ++m)
            for (int p = 0; p < 2; ++p)
                if (t.occupied(m, p))
                    csv += std::to_string(i) + "," + std::to_string(m) + "," +
                           std::to_string(p) + "," + t.count(m, p).str() + "\n";

        const LogAffine c = centering(rc.q, i);
        nlohmann::ordered_json row;
        row["i"] = i;
        row["c_log2"] = rational_str(c.a);
        row["c_logq"] = rational_str(c.b);
        try {
            const KriegerScaling sc = scaling_from_table(rc.q, t, rc.beta);
            row["feasible"] = true;
            row["b_logq"] = rational_str(sc.b);
            row["p_interior"] = rational_str(sc.p_interior);
            row["p_upper"] = rational_str(sc.p_upper);
            row["p_lower"] = rational_str(sc.p_lower);
            row["cond_interior"] = sc.cond_interior;
            row["cond_upper"] = sc.cond_upper;
            row["cond_lower"] = sc.cond_lower;
        } catch (const NoFeasibleScale& e) {
            row["feasible"] = false;
            row["note"] = e.what();
        }
        if (i >= 2)
            row["ks_gaussian"] = ks_gaussian(rc.q, i);
        else
            row["ks_gaussian"] = nullptr;
        rows.push_back(std::move(row));
    }
    w.write_file("dist.csv", csv);
    w.outputs()["rows"] = rows;
    w.finalize();
    return 0;
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

int cmd_replay(const RunConfig& rc, const nlohmann::ordered_json& flags) {
    const nlohmann::json sec = rc.section("replay");
    ReplayConfig cfg;
    cfg.q = rc.q;
    cfg.beta = rc.beta;
    cfg.delta = rc.delta;
    cfg.I = sec.value("I", 1);
    if (sec.contains("u"))
        cfg.u = Prefix{sec.at("u").get<std::vector<std::int64_t>>()};
    else
        cfg.u = Prefix{std::vector<std::int64_t>(static_cast<std::size_t>(std::max(cfg.I, 0)), 0)};
    if (sec.contains("ks")) cfg.ks = sec.at("ks").get<std::vector<int>>();
    if (sec.contains("rho")) cfg.rho_override = rational_parse(sec.at("rho").get<std::string>());
    if (sec.contains("ik")) cfg.ik_override = sec.at("ik").get<int>();
    if (rc.depth) cfg.ik_override = *rc.depth;

    auto defects_echo = nlohmann::ordered_json::array();
    if (sec.contains("defects")) {
        for (const auto& dj : sec.at("defects")) {
            const int level = dj.at("level").get<int>();
            const auto symbols = dj.at("symbols").get<std::vector<std::int64_t>>();
            Defect d;
            d.full_block = true;
            d.tail = DefectTail{level, SymbolSet::from_symbols(symbols)};
            cfg.defects.push_back(std::move(d));
            defects_echo.push_back({{"level", level}, {"symbols", symbols}});
        }
    } else {
        defects_echo.push_back({{"level", 129}, {"symbols", {1}}});
    }

    ReportWriter w("replay", rc.out_dir);
    w.config() = rc.common_echo();
    {
        nlohmann::ordered_json r;
        r["I"] = cfg.I;
        r["u"] = cfg.u.word;
        r["ks"] = cfg.ks;
        if (cfg.rho_override) r["rho"] = rational_str(*cfg.rho_override);
        if (cfg.ik_override) r["ik"] = *cfg.ik_override;
        r["defects"] = defects_echo;
        w.config()["replay"] = r;
    }
    w.flags() = flags;

    const ProofReport rep = replay_proof(cfg);

    std::string csv = "label,pass,borderline,exactness,lhs,rhs,note\n";
    for (const StageRecord& st : rep.stages)
        csv += csv_field(st.label) + "," + (st.pass ? "1" : "0") + "," +
               (st.borderline ? "1" : "0") + "," + st.exactness + "," + csv_field(st.lhs) +
               "," + csv_field(st.rhs) + "," + csv_field(st.note) + "\n";
    w.write_file("stages.csv", csv);

    auto search = nlohmann::ordered_json::array();
    for (const SearchTrace& tr : rep.search) search.push_back(search_json(tr));
    auto stages = nlohmann::ordered_json::array();
    for (const StageRecord& st : rep.stages) stages.push_back(stage_json(st));

    nlohmann::ordered_json chosen;
    chosen["ik"] = rep.ctx.ik;
    chosen["rho"] = rational_str(rep.ctx.rho);
    chosen["b_logq"] = rational_str(rep.ctx.b);
    chosen["xi"] = rational_str(rep.ctx.xi);
    chosen["eta"] = rational_str(rep.ctx.eta);
    chosen["M"] = rep.ctx.M;
    chosen["es_logq"] = rational_str(rep.ctx.es);
    chosen["s"] = rep.ctx.s;
    chosen["anchor_parity"] = rep.ctx.anchor_parity;

    w.outputs()["complete"] = rep.complete;
    w.outputs()["failure"] = rep.failure;
    w.outputs()["case_branch"] = rep.case_branch;
    w.outputs()["mirrored"] = rep.mirrored;
    w.outputs()["chosen"] = chosen;
    w.outputs()["search"] = search;
    w.outputs()["stages"] = stages;
    w.finalize();
    return rep.complete ? 0 : 2;
}

// ---------------------------------------------------------------------------
// kset
// ---------------------------------------------------------------------------

KsetRelation parse_relation(const std::string& s) {
    if (s == "parity") return KsetRelation::parity;
    if (s == "full" || s == "full_tail") return KsetRelation::full_tail;
    throw ConfigError("kset: relation must be 'parity' or 'full_tail'");
}

Cylinder cylinder_from_json(const nlohmann::json& cj) {
    std::vector<std::pair<int, SymbolSet>> cs;
    for (const auto& entry : cj) {
        const int level = entry.at("level").get<int>();
        const auto symbols = entry.at("symbols").get<std::vector<std::int64_t>>();
        cs.emplace_back(level, SymbolSet::from_symbols(symbols));
    }
    return Cylinder{std::move(cs)};
}

int cmd_kset(const RunConfig& rc, const nlohmann::ordered_json& flags) {
    const nlohmann::json sec = rc.section("kset");
    const int depth = rc.depth ? *rc.depth : sec.value("depth", 8);
    if (depth < 1 || depth > 128) throw ConfigError("kset: depth must lie in [1, 128]");
    const KsetRelation relation = parse_relation(sec.value("relation", std::string("parity")));
    std::vector<double> s_values;
    if (sec.contains("s_values"))
        s_values = sec.at("s_values").get<std::vector<double>>();
    else
        s_values = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    if (s_values.empty()) throw ConfigError("kset: empty s grid");

    KsetB kb = std::monostate{};
    std::string b_kind = "whole";
    if (sec.contains("b")) {
        const nlohmann::json bj = sec.at("b");
        b_kind = bj.value("kind", std::string("whole"));
        if (b_kind == "whole") {
            kb = std::monostate{};
        } else if (b_kind == "window") {
            StatPredicate sp;
            sp.free_lo = 1;
            sp.free_hi = depth;
            if (bj.contains("wlo")) sp.wlo = rational_parse(bj.at("wlo").get<std::string>());
            if (bj.contains("whi")) sp.whi = rational_parse(bj.at("whi").get<std::string>());
            if (bj.contains("parity")) sp.parity = bj.at("parity").get<int>();
            kb = sp;
        } else if (b_kind == "cylinders") {
            std::vector<Cylinder> cyls;
            for (const auto& cj : bj.at("cylinders")) cyls.push_back(cylinder_from_json(cj));
            if (cyls.empty()) throw ConfigError("kset: empty cylinder union");
            kb = std::move(cyls);
        } else {
            throw ConfigError("kset: b.kind must be whole, window, or cylinders");
        }
    }

    const BaseSchedule sched(rc.q, depth);
    ReportWriter w("kset", rc.out_dir);
    w.config() = rc.common_echo();
    {
        nlohmann::ordered_json k;
        k["depth"] = depth;
        k["relation"] = relation == KsetRelation::parity ? "parity" : "full_tail";
        k["s_values"] = s_values;
        k["b_kind"] = b_kind;
        if (sec.contains("b")) k["b"] = sec.at("b");
        w.config()["kset"] = k;
    }
    w.flags() = flags;

    std::string csv = "s,exact,measure,estimate,half_ci,samples,borderline,note\n";
    auto rows = nlohmann::ordered_json::array();
    bool budget_stop = false;
    for (const double s : s_values) {
        nlohmann::ordered_json row;
        row["s"] = s;
        try {
            const KsetResult r =
                k_set_measure(sched, kb, s, rational_double(rc.delta), depth, relation, rc.mode,
                              rc.state_budget, rc.mc_samples, rc.seed, rc.workers);
            const std::string note =
                (!r.exact && rc.mode == RunMode::auto_mode)
                    ? "state budget exceeded; Monte Carlo fallback"
                    : "";
            row["exact"] = r.exact;
            if (r.exact) row["measure"] = rational_str(r.measure);
            row["estimate"] = r.estimate;
            row["half_ci"] = r.half_ci;
            row["samples"] = r.samples;
            row["borderline"] = r.borderline;
            row["note"] = note;
            csv += fstr(s) + "," + (r.exact ? "1" : "0") + "," +
                   (r.exact ? rational_str(r.measure) : "") + "," + fstr(r.estimate) + "," +
                   fstr(r.half_ci) + "," + std::to_string(r.samples) + "," +
                   (r.borderline ? "1" : "0") + "," + csv_field(note) + "\n";
        } catch (const BudgetExceeded& e) {
            budget_stop = true;
            row["exact"] = false;
            row["note"] = std::string("budget exceeded: ") + e.what();
            csv += fstr(s) + ",0,,,,,," + csv_field(e.what()) + "\n";
        }
        rows.push_back(std::move(row));
    }
    w.write_file("kset.csv", csv);
    w.outputs()["rows"] = rows;
    w.outputs()["budget_exceeded"] = budget_stop;
    w.finalize();
    return budget_stop ? 3 : 0;
}

// ---------------------------------------------------------------------------
// bratteli
// ---------------------------------------------------------------------------

int cmd_bratteli(const RunConfig& rc, const nlohmann::ordered_json& flags) {
    const nlohmann::json sec = rc.section("bratteli");
    const int levels = rc.depth ? *rc.depth : sec.value("levels", 3);
    const int audit_depth = sec.value("audit_depth", std::min(levels, 2));
    if (levels < 1 || levels > 16) throw ConfigError("bratteli: levels must lie in [1, 16]");
    if (audit_depth < 0 || audit_depth > levels)
        throw ConfigError("bratteli: audit depth must lie in [0, levels]");

    const BratteliDiagram d = build_diagram(rc.q, levels);
    ReportWriter w("bratteli", rc.out_dir);
    w.config() = rc.common_echo();
    w.config()["bratteli"] = {{"levels", levels}, {"audit_depth", audit_depth}};
    w.flags() = flags;
    w.write_file("bratteli.dot", to_dot(d));

    // Pushforward audit: every point prefix up to the audit depth lifts to a
    // unique path whose AF-measure matches the point measure.
    std::uint64_t checked = 0;
    bool all_equal = true;
    std::vector<std::int64_t> sizes;
    BigInt total{1};
    for (int j = 1; j <= audit_depth; ++j) {
        sizes.push_back(checked_pow_i64(rc.q, j) + 1);
        total *= sizes.back();
    }
    if (total > BigInt(200'000))
        throw ConfigError("bratteli: audit enumeration over 200000 paths; lower audit_depth");
    if (audit_depth > 0) {
        std::vector<std::int64_t> word(static_cast<std::size_t>(audit_depth), 0);
        for (;;) {
            const Prefix p{word};
            const PathPrefix path = point_to_path(p);
            bool ok = static_cast<bool>(validate_path(d, path));
            if (ok) {
                const auto [mu_path, mu_point] = pushforward_check(rc.q, path);
                ok = mu_path == mu_point && path_to_point(d, path).word == word;
            }
            all_equal = all_equal && ok;
            ++checked;
            int pos = audit_depth - 1;
            while (pos >= 0 && word[static_cast<std::size_t>(pos)] ==
                                   sizes[static_cast<std::size_t>(pos)] - 1) {
                word[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++word[static_cast<std::size_t>(pos)];
        }
    }
    w.outputs()["levels"] = levels;
    w.outputs()["audit_depth"] = audit_depth;
    w.outputs()["paths_checked"] = checked;
    w.outputs()["pushforward_equal"] = all_equal;
    w.finalize();
    return all_equal ? 0 : 2;
}

// ---------------------------------------------------------------------------
// lemma-audit
// ---------------------------------------------------------------------------

struct AuditOutcome {
    std::uint64_t instances = 0;
    std::uint64_t verified = 0;
    std::uint64_t retries = 0;
    bool all_ok = true;
    std::string first_failure;
};

Rational audit_word_density(const BaseSchedule& sched, const std::vector<Defect>& defects,
                            const std::vector<std::int64_t>& word) {
    Rational dens{1};
    for (const Defect& d : defects) {
        bool covers = d.full_block;
        if (!covers)
            for (const auto& w : d.block_words)
                if (w == word) {
                    covers = true;
                    break;
                }
        if (covers) dens *= 1 - defect_tail_mass(sched, d);
    }
    return dens;
}

AuditOutcome run_lemma_audit(std::int64_t q, const Rational& beta, std::uint64_t n_instances,
                             std::uint64_t seed) {
    if (beta <= 0 || beta >= Rational(1, 2))
        throw ConfigError("lemma-audit: beta must lie in (0, 1/2)");
    const Rational xi = std::min(beta, Rational(1 - 2 * beta));
    AuditOutcome out;

    for (std::uint64_t inst = 0; inst < n_instances; ++inst) {
        ++out.instances;
        bool done = false;
        for (std::uint64_t attempt = 0; attempt < 64 && !done; ++attempt) {
            SplitMix64 rng = make_stream(seed, inst * 64 + attempt);
            const int big_i = 1 + static_cast<int>(rng.next_below(2)); // I in {1, 2}
            const int d_hi =
                big_i + 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(5 - big_i)));

            // Keep the explicit enumeration small for large alphabets.
            BigInt block_count{1};
            for (int j = big_i + 1; j <= d_hi; ++j)
                block_count *= bigint_pow(BigInt(q), static_cast<std::uint64_t>(j)) + 1;
            if (block_count > BigInt(200'000)) {
                ++out.retries;
                continue;
            }

            std::vector<std::int64_t> usym;
            for (int j = 1; j <= big_i; ++j)
                usym.push_back(static_cast<std::int64_t>(
                    rng.next_below(static_cast<std::uint64_t>(checked_pow_i64(q, j)) + 1)));

            const int ndef = static_cast<int>(rng.next_below(3));
            std::vector<Defect> defects;
            int next_tail = 10;
            for (int di = 0; di < ndef; ++di) {
                const int lvl = next_tail++;
                const std::int64_t qlvl = checked_pow_i64(q, lvl);
                Defect d;
                if (rng.next_bit()) {
                    // Thin full-block defect: one removed symbol deep in the tail.
                    d.full_block = true;
                    d.tail = DefectTail{
                        lvl, SymbolSet::single(BigInt(
                                 1 + static_cast<std::int64_t>(
                                         rng.next_below(static_cast<std::uint64_t>(qlvl)))))};
                } else {
                    // Fat-tail defect on explicit nonzero block words; tail mass
                    // 1/4 drops the word from E0, 1/8 keeps it.
                    d.full_block = false;
                    const int nwords = 1 + static_cast<int>(rng.next_below(2));
                    for (int wi = 0; wi < nwords; ++wi) {
                        std::vector<std::int64_t> word;
                        for (int j = big_i + 1; j <= d_hi; ++j)
                            word.push_back(1 + static_cast<std::int64_t>(rng.next_below(
                                                   static_cast<std::uint64_t>(
                                                       checked_pow_i64(q, j)))));
                        d.block_words.push_back(std::move(word));
                    }
                    std::sort(d.block_words.begin(), d.block_words.end());
                    d.block_words.erase(
                        std::unique(d.block_words.begin(), d.block_words.end()),
                        d.block_words.end());
                    const std::int64_t top = rng.next_bit() ? qlvl / 2 : qlvl / 4;
                    d.tail = DefectTail{lvl, SymbolSet::nonzero_range(1, BigInt(top))};
                }
                defects.push_back(std::move(d));
            }

            const BaseSchedule sched(q, std::max(d_hi, next_tail - 1));
            const BSpec b{Prefix{usym}, defects};
            const BlockEnumeration block = enumerate_block(sched, big_i + 1, d_hi);

            // Independent hypothesis precheck.
            std::vector<Rational> dens(block.words.size());
            Rational rel{0};
            for (std::size_t i = 0; i < block.words.size(); ++i) {
                dens[i] = audit_word_density(sched, defects, block.words[i]);
                rel += block.measures[i] * dens[i];
            }
            if (!(rel > 1 - xi / 128)) {
                ++out.retries;
                continue;
            }
            std::vector<std::uint32_t> e;
            Rational mu_e{0};
            for (std::uint32_t i = 0; i < block.words.size(); ++i)
                if (rng.next_below(4) == 0) {
                    e.push_back(i);
                    mu_e += block.measures[i];
                }
            if (!(mu_e > xi / 16)) {
                ++out.retries;
                continue;
            }

            std::vector<std::uint32_t> e0;
            LemmaCertificate cert;
            try {
                cert = lemma_refine(sched, xi, b, block, e, &e0);
            } catch (const Error& ex) {
                if (out.all_ok) {
                    out.all_ok = false;
                    out.first_failure = "instance " + std::to_string(inst) +
                                        " raised: " + ex.what();
                }
                done = true;
                continue;
            }

            // Independent recomputation of the refinement.
            std::vector<std::uint32_t> expect;
            Rational mu_e0{0};
            for (const std::uint32_t idx : e)
                if (dens[idx] > Rational(3, 4)) {
                    expect.push_back(idx);
                    mu_e0 += block.measures[idx];
                }
            const bool ok = cert.holds && e0 == expect && cert.mu_e0 == mu_e0 &&
                            cert.mu_e == mu_e && 2 * mu_e0 > mu_e &&
                            cert.mu_zu == prefix_measure(sched, b.u) &&
                            cert.mu_b == cert.mu_zu * rel;
            if (ok) {
                ++out.verified;
            } else if (out.all_ok) {
                out.all_ok = false;
                out.first_failure = "instance " + std::to_string(inst) + " (I=" +
                                    std::to_string(big_i) + ", block hi=" +
                                    std::to_string(d_hi) + ")";
            }
            done = true;
        }
        if (!done && out.all_ok) {
            out.all_ok = false;
            out.first_failure =
                "instance " + std::to_string(inst) + " could not be generated";
        }
    }
    return out;
}

int cmd_lemma_audit(const RunConfig& rc, const nlohmann::ordered_json& flags) {
    const nlohmann::json sec = rc.section("lemma_audit");
    const std::uint64_t instances = sec.value("instances", std::uint64_t{1000});
    const std::int64_t q = sec.contains("q") ? sec.at("q").get<std::int64_t>() : rc.q;
    if (q < 2) throw ConfigError("lemma-audit: q must be >= 2");
    if (instances < 1) throw ConfigError("lemma-audit: instances must be >= 1");

    ReportWriter w("lemma-audit", rc.out_dir);
    w.config() = rc.common_echo();
    w.config()["lemma_audit"] = {{"instances", instances}, {"q", q}};
    w.flags() = flags;

    const AuditOutcome out = run_lemma_audit(q, rc.beta, instances, rc.seed);
    w.outputs()["instances"] = out.instances;
    w.outputs()["verified"] = out.verified;
    w.outputs()["retries"] = out.retries;
    w.outputs()["all_ok"] = out.all_ok;
    w.outputs()["first_failure"] = out.first_failure;
    w.finalize();
    return out.all_ok ? 0 : 2;
}

} // namespace

// ---------------------------------------------------------------------------
// CLI wiring
// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
    CLI::App app{"exact verification toolkit for a parity-constrained product odometer"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "JSON config file");
    app.add_option("--q", opt.q, "base parameter q >= 2");
    app.add_option("--beta", opt.beta, "quantile level as a rational, e.g. 1/4");
    app.add_option("--delta", opt.delta, "cocycle window half-width as a rational");
    app.add_option("--depth", opt.depth, "per-command depth override");
    app.add_option("--seed", opt.seed, "random seed");
    app.add_option("--workers", opt.workers, "worker threads");
    app.add_option("--mode", opt.mode, "exact | mc | auto");
    app.add_option("--out", opt.out_dir, "output directory");

    CLI::App* sub_orbit = app.add_subcommand("orbit", "walk the odometer and dump cocycles");
    CLI::App* sub_dist =
        app.add_subcommand("dist", "statistic tables, centering, scale, and normal distance");
    CLI::App* sub_replay =
        app.add_subcommand("replay", "replay the full inequality chain at a verified depth");
    CLI::App* sub_kset = app.add_subcommand("kset", "measure partner sets over an s grid");
    CLI::App* sub_bratteli =
        app.add_subcommand("bratteli", "emit the diagram and audit the path encoding");
    CLI::App* sub_lemma =
        app.add_subcommand("lemma-audit", "randomized exact audit of the refinement lemma");
    for (CLI::App* sub : {sub_orbit, sub_dist, sub_replay, sub_kset, sub_bratteli, sub_lemma})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        const RunConfig rc = make_run_config(opt);
        nlohmann::ordered_json flags = nlohmann::ordered_json::object();
        if (opt.config_path) flags["config"] = *opt.config_path;
        if (opt.q) flags["q"] = *opt.q;
        if (opt.beta) flags["beta"] = *opt.beta;
        if (opt.delta) flags["delta"] = *opt.delta;
        if (opt.depth) flags["depth"] = *opt.depth;
        if (opt.seed) flags["seed"] = *opt.seed;
        if (opt.mode) flags["mode"] = *opt.mode;

        if (sub_orbit->parsed()) return cmd_orbit(rc, flags);
        if (sub_dist->parsed()) return cmd_dist(rc, flags);
        if (sub_replay->parsed()) return cmd_replay(rc, flags);
        if (sub_kset->parsed()) return cmd_kset(rc, flags);
        if (sub_bratteli->parsed()) return cmd_bratteli(rc, flags);
        if (sub_lemma->parsed()) return cmd_lemma_audit(rc, flags);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace parodo
