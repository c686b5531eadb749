// End-to-end replay of the inequality chain: the default configuration must
// verify completely, with every intermediate quantity matching values frozen
// from an independent exact enumeration.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "parodo/krieger.hpp"

using namespace parodo;

namespace {

Rational rat(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

const std::vector<std::string> kFullChain = {
    "hypothesis", "(1)",  "(2)",  "(3)",        "(4)",  "(5)",  "(6)",
    "(7)",        "(7bis)", "(7trei)", "(8)",   "(9)",  "(9-literal)",
    "(10)",       "(11)", "(12)", "(13)",       "(14)", "(15)", "(16)",
    "(17)",       "case", "(18)", "(19)",       "(21)", "(20)", "final"};

std::vector<std::string> labels(const ProofReport& rep) {
    std::vector<std::string> out;
    for (const StageRecord& st : rep.stages) out.push_back(st.label);
    return out;
}

const StageRecord& stage(const ProofReport& rep, const std::string& label) {
    for (const StageRecord& st : rep.stages)
        if (st.label == label) return st;
    REQUIRE_MESSAGE(false, "missing stage ", label);
    static StageRecord dummy;
    return dummy;
}

} // namespace

TEST_CASE("default replay verifies the full chain at depth 64") {
    const ProofReport rep = replay_proof(ReplayConfig{});

    CHECK(rep.complete);
    CHECK(rep.failure.empty());
    CHECK(rep.case_branch == 1);
    CHECK_FALSE(rep.mirrored);

    // Depth scan: (8) needs b(i) logq > e^(M+1) ~ 73.26, first reached at 64.
    REQUIRE(rep.search.size() == 4);
    CHECK(rep.search[0].ik == 8);
    CHECK(rep.search[1].ik == 16);
    CHECK(rep.search[2].ik == 32);
    CHECK(rep.search[3].ik == 64);
    for (int i = 0; i < 3; ++i) {
        CHECK_FALSE(rep.search[static_cast<std::size_t>(i)].pass8);
        CHECK(rep.search[static_cast<std::size_t>(i)].note ==
              "ScaleTooSmall; window gates not evaluated");
    }
    CHECK(rep.search[3].pass8);
    CHECK(rep.search[3].pass10);
    CHECK(rep.search[3].pass11);

    // Chosen scale and derived constants, all frozen from the exact oracle.
    CHECK(rep.ctx.ik == 64);
    CHECK(rep.ctx.b == rat(101));
    CHECK(rep.ctx.rho == rat(0));
    CHECK(rep.ctx.xi == rat(1, 4));
    CHECK(rep.ctx.eta == rat(1, 256));
    CHECK(rep.ctx.M == doctest::Approx(3.2940321758870557));
    CHECK(rep.ctx.es == rat(2079, 2));
    CHECK(rep.ctx.s == doctest::Approx(7.422380102625178));
    CHECK(rep.ctx.anchor_parity == 0);

    // Anchor v- is the all-zeros block word; v+ is all ones from level 44 up.
    REQUIRE(rep.ctx.vminus.size() == 63);
    REQUIRE(rep.ctx.vplus.size() == 63);
    for (const std::int64_t v : rep.ctx.vminus) CHECK(v == 0);
    for (std::size_t k = 0; k < 63; ++k) {
        const int level = 2 + static_cast<int>(k);
        CHECK(rep.ctx.vplus[k] == (level >= 44 ? 1 : 0));
    }
    CHECK(stage(rep, "(12)").lhs == "m(v-) = 0, m(v+) = 1134");

    // Full stage chain in order, all passing, none borderline.
    CHECK(labels(rep) == kFullChain);
    for (const StageRecord& st : rep.stages) {
        CHECK_MESSAGE(st.pass, "stage ", st.label, ": ", st.note);
        CHECK_FALSE(st.borderline);
        CHECK((st.exactness == "exact-rational" || st.exactness == "guarded-float"));
    }

    // Exactness split: float only where a transcendental bound appears.
    CHECK(stage(rep, "(8)").exactness == "guarded-float");
    CHECK(stage(rep, "(7trei)").exactness == "guarded-float");
    CHECK(stage(rep, "(17)").exactness == "guarded-float");
    CHECK(stage(rep, "(21)").exactness == "guarded-float");
    CHECK(stage(rep, "(10)").exactness == "exact-rational");
    CHECK(stage(rep, "final").exactness == "exact-rational");

    // The cocycle window of (21) spans the occupied block classes [989, 1090].
    CHECK(stage(rep, "(21)").lhs == "|dm| in [989, 1090]");
    CHECK(stage(rep, "case").note.find("case I") != std::string::npos);

    // The gamma machinery was captured into the context.
    REQUIRE(rep.ctx.sets.has_value());
    CHECK(rep.ctx.sets->mu_gamma > rat(1, 16));
    CHECK(rep.ctx.sets->mu_gamma_minus >= rat(1, 4));
    CHECK(rep.ctx.sets->mu_gamma_plus >= rat(1, 4));
    REQUIRE(rep.ctx.e0_components.size() == 1);
}

TEST_CASE("forcing a shallow depth fails exactly at the scale gate") {
    ReplayConfig cfg;
    cfg.ik_override = 3;
    const ProofReport rep = replay_proof(cfg);
    CHECK_FALSE(rep.complete);
    CHECK(rep.failure == "(8)");
    CHECK(rep.ctx.ik == 3);
    CHECK(rep.ctx.b == rat(2));
    REQUIRE(rep.search.size() == 1);
    CHECK_FALSE(rep.search[0].pass8);
    // Stages up to and including the failed gate; nothing after.
    REQUIRE_FALSE(rep.stages.empty());
    CHECK(rep.stages.back().label == "(8)");
    CHECK_FALSE(rep.stages.back().pass);
    CHECK(rep.stages.back().note == "ScaleTooSmall");
    CHECK(rep.case_branch == 0);
    CHECK_FALSE(rep.mirrored);
    // The scan conditions themselves hold at depth 3 (they fail only at (8)).
    CHECK(stage(rep, "(2)").pass);
    CHECK(stage(rep, "(3)").pass);
    CHECK(stage(rep, "(4)").pass);
    CHECK(stage(rep, "(7)").pass);
}

TEST_CASE("negative rho runs the mirrored branch to completion") {
    ReplayConfig cfg;
    cfg.rho_override = rat(-1, 4);
    const ProofReport rep = replay_proof(cfg);
    CHECK(rep.complete);
    CHECK(rep.mirrored);
    CHECK(rep.case_branch == 1);
    CHECK(rep.ctx.ik == 64);
    CHECK(rep.ctx.rho == rat(-1, 4));
    // Anchor flips to v+ (all ones from level 44): parity 1, m = 1134.
    CHECK(rep.ctx.anchor_parity == 1);
    CHECK(rep.ctx.es == rat(189, 2)); // |1134 - 2079/2|
    CHECK(stage(rep, "(12)").note.find("mirrored") != std::string::npos);
    CHECK(stage(rep, "(21)").lhs == "|dm| in [70, 170]");
    for (const StageRecord& st : rep.stages) CHECK_MESSAGE(st.pass, "stage ", st.label);
}

TEST_CASE("the chain also closes at q = 2") {
    ReplayConfig cfg;
    cfg.q = 2;
    const ProofReport rep = replay_proof(cfg);
    CHECK(rep.complete);
    CHECK(rep.ctx.ik == 64); // same first passing depth: e^(M+1) ~ 31.6, b ln2 first beats it at 64
    CHECK(rep.ctx.b == rat(101));
    CHECK(rep.case_branch == 1);
    CHECK(rep.ctx.es == rat(2079, 2));
}

TEST_CASE("replay configuration validation") {
    {
        ReplayConfig cfg;
        cfg.ks = {};
        CHECK_THROWS_AS(replay_proof(cfg), ConfigError);
    }
    {
        ReplayConfig cfg;
        cfg.ik_override = 1; // does not exceed I = 1
        CHECK_THROWS_AS(replay_proof(cfg), ConfigError);
    }
    {
        ReplayConfig cfg;
        cfg.rho_override = rat(3, 2);
        CHECK_THROWS_AS(replay_proof(cfg), ConfigError);
    }
    {
        ReplayConfig cfg; // defect tail inside the scan range
        Defect d;
        d.full_block = true;
        d.tail = DefectTail{64, SymbolSet::single(BigInt(1))};
        cfg.defects = {d};
        CHECK_THROWS_AS(replay_proof(cfg), ConfigError);
    }
    {
        ReplayConfig cfg; // explicit block part is not allowed here
        Defect d;
        d.full_block = false;
        d.block_words = {{1}};
        d.tail = DefectTail{129, SymbolSet::single(BigInt(1))};
        cfg.defects = {d};
        CHECK_THROWS_AS(replay_proof(cfg), ConfigError);
    }
    {
        ReplayConfig cfg; // duplicate defect tail levels
        Defect a, b;
        a.full_block = b.full_block = true;
        a.tail = DefectTail{129, SymbolSet::single(BigInt(1))};
        b.tail = DefectTail{129, SymbolSet::single(BigInt(2))};
        cfg.defects = {a, b};
        CHECK_THROWS_AS(replay_proof(cfg), ConfigError);
    }
}
