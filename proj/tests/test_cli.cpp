#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

// End-to-end tests of the installed binary: exit codes, report.json shape,
// CSV artifacts, environment overrides, and worker-count determinism.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string& cli_bin() {
    static const std::string bin = [] {
        const char* p = std::getenv("PARODO_CLI_BIN");
        REQUIRE_MESSAGE(p != nullptr, "PARODO_CLI_BIN must point at the CLI binary");
        return std::string(p);
    }();
    return bin;
}

fs::path work_root() {
    static const fs::path root = [] {
        fs::path r = fs::temp_directory_path() /
                     ("parodo_cli_tests_" + std::to_string(::getpid()));
        fs::remove_all(r);
        fs::create_directories(r);
        return r;
    }();
    return root;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = work_root() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// Runs the CLI through the shell, discarding output; returns the exit code.
int run(const std::string& args, const std::string& env_prefix = "") {
    std::string cmd = env_prefix;
    if (!cmd.empty()) cmd += " ";
    cmd += "\"" + cli_bin() + "\" " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    REQUIRE(st != -1);
    REQUIRE(WIFEXITED(st));
    return WEXITSTATUS(st);
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_report(const fs::path& dir) { return json::parse(read_text(dir / "report.json")); }

std::size_t line_count(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path p = work_root() / name;
    std::ofstream out(p, std::ios::binary);
    out << body;
    return p;
}

std::string outflag(const fs::path& dir) { return "--out \"" + dir.string() + "\""; }

} // namespace

TEST_CASE("cli: usage and validation exit codes") {
    const fs::path dir = fresh_dir("exit_codes");
    CHECK(run("") == 1);                 // a subcommand is required
    CHECK(run("--help") == 0);
    CHECK(run("--no-such-flag orbit") == 1);
    CHECK(run("orbit --mode bogus " + outflag(dir)) == 1);
    CHECK(run("orbit --q 1 " + outflag(dir)) == 1);
    CHECK(run("orbit --beta 1 " + outflag(dir)) == 1);
    CHECK(run("orbit --beta 0 " + outflag(dir)) == 1);
    CHECK(run("orbit --delta 0 " + outflag(dir)) == 1);
    CHECK(run("orbit --workers 0 " + outflag(dir)) == 1);
    CHECK(run("--config /no/such/file.json orbit " + outflag(dir)) == 1);

    const fs::path bad = write_config("bad.json", "this is not json");
    CHECK(run("--config \"" + bad.string() + "\" orbit " + outflag(dir)) == 1);
    const fs::path arr = write_config("array.json", "[1, 2]");
    CHECK(run("--config \"" + arr.string() + "\" orbit " + outflag(dir)) == 1);
    const fs::path sec = write_config("section.json", "{\"orbit\": 5}");
    CHECK(run("--config \"" + sec.string() + "\" orbit " + outflag(dir)) == 1);
}

TEST_CASE("cli: orbit default run") {
    const fs::path dir = fresh_dir("orbit_default");
    REQUIRE(run("orbit " + outflag(dir)) == 0);

    const json rep = read_report(dir);
    CHECK(rep.at("version") == "1.0.0");
    CHECK(rep.at("command") == "orbit");
    CHECK(rep.at("config").at("q") == 5);
    CHECK(rep.at("config").at("beta") == "1/4");
    CHECK(rep.at("config").at("delta") == "3/1");
    CHECK(rep.at("config").at("seed") == 1);
    CHECK(rep.at("config").at("mode") == "auto");
    CHECK(rep.at("config").at("state_budget") == 10000000);
    CHECK(rep.at("config").at("mc_samples") == 200000);
    CHECK(rep.at("config").at("orbit").at("L") == 8);
    CHECK(rep.at("config").at("orbit").at("steps") == 100);
    CHECK(rep.at("flags") == json::object()); // --out is location, not a parameter
    CHECK(rep.at("outputs").at("steps_requested") == 100);
    CHECK(rep.at("outputs").at("steps_completed") == 100);
    CHECK(rep.at("outputs").at("overflow_truncated") == false);
    CHECK(rep.at("files") == json::array({"orbit.csv"}));

    const std::string csv = read_text(dir / "orbit.csv");
    CHECK(line_count(csv) == 101); // header + one row per step
    CHECK(csv.rfind("step,prefix,cocycle_a,cocycle_b\n", 0) == 0);
    CHECK(csv.find("\n1,") != std::string::npos);
}

TEST_CASE("cli: orbit honors config start, length, and steps") {
    const fs::path dir = fresh_dir("orbit_config");
    const fs::path cfg = write_config(
        "orbit_start.json", R"({"orbit": {"L": 3, "start": [1, 7, 0], "steps": 1}})");
    REQUIRE(run("--config \"" + cfg.string() + "\" orbit " + outflag(dir)) == 0);

    const json rep = read_report(dir);
    CHECK(rep.at("config").at("orbit").at("L") == 3);
    CHECK(rep.at("config").at("orbit").at("start") == json::array({1, 7, 0}));
    CHECK(rep.at("flags").at("config") == cfg.string());
    CHECK(rep.at("outputs").at("steps_completed") == 1);

    // One head increment: no carry, so both cocycle components stay zero.
    const std::string csv = read_text(dir / "orbit.csv");
    CHECK(csv == "step,prefix,cocycle_a,cocycle_b\n1,2:7:0,0,0\n");
}

TEST_CASE("cli: orbit truncates when the carry leaves the buffer") {
    const fs::path dir = fresh_dir("orbit_overflow");
    const fs::path cfg = write_config(
        "orbit_overflow.json", R"({"orbit": {"L": 2, "start": [0, 25], "steps": 5}})");
    REQUIRE(run("--config \"" + cfg.string() + "\" orbit " + outflag(dir)) == 0);

    const json rep = read_report(dir);
    CHECK(rep.at("outputs").at("steps_requested") == 5);
    CHECK(rep.at("outputs").at("steps_completed") == 0);
    CHECK(rep.at("outputs").at("overflow_truncated") == true);
    CHECK(line_count(read_text(dir / "orbit.csv")) == 1); // header only
}

TEST_CASE("cli: dist row at depth 3") {
    const fs::path dir = fresh_dir("dist_depth3");
    REQUIRE(run("dist --depth 3 " + outflag(dir)) == 0);

    const json rep = read_report(dir);
    CHECK(rep.at("command") == "dist");
    CHECK(rep.at("config").at("dist").at("depths") == json::array({3}));
    CHECK(rep.at("flags").at("depth") == 3);
    const json& rows = rep.at("outputs").at("rows");
    REQUIRE(rows.size() == 1);
    const json& row = rows.at(0);
    CHECK(row.at("i") == 3);
    CHECK(row.at("c_log2") == "-3/1");
    CHECK(row.at("c_logq") == "-3/1");
    CHECK(row.at("feasible") == true);
    CHECK(row.at("b_logq") == "2/1");
    CHECK(row.at("p_interior") == "3/4");
    CHECK(row.at("p_upper") == "1/4");
    CHECK(row.at("p_lower") == "1/4");
    CHECK(row.at("cond_interior") == true);
    CHECK(row.at("cond_upper") == true);
    CHECK(row.at("cond_lower") == true);
    CHECK(row.at("ks_gaussian").is_number());

    const std::string csv = read_text(dir / "dist.csv");
    CHECK(csv.rfind("i,m,parity,count\n", 0) == 0);
    CHECK(line_count(csv) == 9); // header + 8 occupied (m, parity) cells
    CHECK(csv.find("3,3,0,1\n") != std::string::npos);
    CHECK(csv.find("3,3,1,1\n") != std::string::npos);
    CHECK(csv.find("3,0,0,1\n") != std::string::npos);
    CHECK(csv.find("3,6,1,1\n") != std::string::npos);
}

TEST_CASE("cli: dist handles the empty-range depth") {
    const fs::path dir = fresh_dir("dist_depth0");
    const fs::path cfg = write_config("dist0.json", R"({"dist": {"depths": [0]}})");
    REQUIRE(run("--config \"" + cfg.string() + "\" dist " + outflag(dir)) == 0);

    const json row = read_report(dir).at("outputs").at("rows").at(0);
    CHECK(row.at("i") == 0);
    CHECK(row.at("c_log2") == "0/1");
    CHECK(row.at("feasible") == false);
    CHECK(row.at("ks_gaussian").is_null());
    CHECK(read_text(dir / "dist.csv") == "i,m,parity,count\n0,0,0,1\n");
}

TEST_CASE("cli: replay completes at the default schedule") {
    const fs::path dir = fresh_dir("replay_default");
    REQUIRE(run("replay " + outflag(dir)) == 0);

    const json rep = read_report(dir);
    CHECK(rep.at("command") == "replay");
    const json& out = rep.at("outputs");
    CHECK(out.at("complete") == true);
    CHECK(out.at("failure") == "");
    CHECK(out.at("case_branch") == 1);
    CHECK(out.at("mirrored") == false);
    const json& chosen = out.at("chosen");
    CHECK(chosen.at("ik") == 64);
    CHECK(chosen.at("rho") == "0/1");
    CHECK(chosen.at("b_logq") == "101/1");
    CHECK(chosen.at("xi") == "1/4");
    CHECK(chosen.at("eta") == "1/256");
    CHECK(chosen.at("es_logq") == "2079/2");
    CHECK(chosen.at("anchor_parity") == 0);

    const json& search = out.at("search");
    REQUIRE(search.size() == 4);
    for (int k = 0; k < 3; ++k) CHECK(search.at(k).at("scale_gate") == false);
    CHECK(search.at(3).at("ik") == 64);
    CHECK(search.at(3).at("scale_gate") == true);
    CHECK(search.at(3).at("window_gate") == true);
    CHECK(search.at(3).at("tail_gate") == true);

    const json& stages = out.at("stages");
    REQUIRE(stages.size() == 27);
    for (const json& st : stages) {
        CHECK(st.at("pass") == true);
        CHECK(st.at("borderline") == false);
    }
    CHECK(stages.at(0).at("label") == "hypothesis");
    CHECK(stages.back().at("label") == "final");

    const std::string csv = read_text(dir / "stages.csv");
    CHECK(csv.rfind("label,pass,borderline,exactness,lhs,rhs,note\n", 0) == 0);
    CHECK(line_count(csv) == 28);
    CHECK(rep.at("files") == json::array({"stages.csv"}));
}

TEST_CASE("cli: replay reports the first failed gate at a forced shallow depth") {
    const fs::path dir = fresh_dir("replay_shallow");
    CHECK(run("replay --depth 3 " + outflag(dir)) == 2);

    const json out = read_report(dir).at("outputs");
    CHECK(out.at("complete") == false);
    CHECK(out.at("failure") == "(8)");
    CHECK(out.at("chosen").at("ik") == 3);
    CHECK(out.at("search").size() == 1);
    const json& stages = out.at("stages");
    REQUIRE(!stages.empty());
    CHECK(stages.back().at("label") == "(8)");
    CHECK(stages.back().at("pass") == false);
}

TEST_CASE("cli: kset default grid is fully exact") {
    const fs::path dir = fresh_dir("kset_default");
    REQUIRE(run("kset " + outflag(dir)) == 0);

    const json rep = read_report(dir);
    CHECK(rep.at("config").at("kset").at("depth") == 8);
    CHECK(rep.at("config").at("kset").at("relation") == "parity");
    CHECK(rep.at("config").at("kset").at("b_kind") == "whole");
    const json& rows = rep.at("outputs").at("rows");
    REQUIRE(rows.size() == 8);
    for (const json& row : rows) {
        CHECK(row.at("exact") == true);
        CHECK(row.at("note") == "");
    }
    CHECK(rep.at("outputs").at("budget_exceeded") == false);
    CHECK(line_count(read_text(dir / "kset.csv")) == 9);
}

namespace {
const char* kTwoCylinderKset = R"({
  "state_budget": 1,
  "mc_samples": 50000,
  %MODE%
  "kset": {
    "depth": 2,
    "s_values": [0.5],
    "b": {"kind": "cylinders", "cylinders": [
      [{"level": 1, "symbols": [0]}],
      [{"level": 2, "symbols": [0]}]
    ]}
  }
})";

std::string kset_budget_config(const std::string& mode_line) {
    std::string s = kTwoCylinderKset;
    const std::string tag = "%MODE%";
    s.replace(s.find(tag), tag.size(), mode_line);
    return s;
}
} // namespace

TEST_CASE("cli: kset exact mode stops on the state budget") {
    const fs::path dir = fresh_dir("kset_budget_exact");
    const fs::path cfg =
        write_config("kset_exact.json", kset_budget_config("\"mode\": \"exact\","));
    CHECK(run("--config \"" + cfg.string() + "\" kset " + outflag(dir)) == 3);

    const json out = read_report(dir).at("outputs");
    CHECK(out.at("budget_exceeded") == true);
    const json& row = out.at("rows").at(0);
    CHECK(row.at("exact") == false);
    CHECK(row.at("note").get<std::string>().rfind("budget exceeded", 0) == 0);
}

TEST_CASE("cli: kset auto mode falls back to sampling under the same budget") {
    const fs::path dir = fresh_dir("kset_budget_auto");
    const fs::path cfg = write_config("kset_auto.json", kset_budget_config("\"mode\": \"auto\","));
    CHECK(run("--config \"" + cfg.string() + "\" kset " + outflag(dir)) == 0);

    const json out = read_report(dir).at("outputs");
    CHECK(out.at("budget_exceeded") == false);
    const json& row = out.at("rows").at(0);
    CHECK(row.at("exact") == false);
    CHECK(row.at("note") == "state budget exceeded; Monte Carlo fallback");
    CHECK(row.at("samples") == 50000);
    const double est = row.at("estimate").get<double>();
    CHECK(est >= 0.0);
    CHECK(est <= 1.0);
}

TEST_CASE("cli: bratteli audit at the default depth") {
    const fs::path dir = fresh_dir("bratteli_default");
    REQUIRE(run("bratteli " + outflag(dir)) == 0);

    const json rep = read_report(dir);
    CHECK(rep.at("outputs").at("levels") == 3);
    CHECK(rep.at("outputs").at("audit_depth") == 2);
    CHECK(rep.at("outputs").at("paths_checked") == 156); // (5+1) * (25+1)
    CHECK(rep.at("outputs").at("pushforward_equal") == true);
    CHECK(rep.at("files") == json::array({"bratteli.dot"}));
    CHECK(read_text(dir / "bratteli.dot").find("digraph") != std::string::npos);
}

TEST_CASE("cli: lemma-audit verifies every sampled instance") {
    const fs::path dir = fresh_dir("lemma_audit");
    const fs::path cfg = write_config("lemma20.json", R"({"lemma_audit": {"instances": 20}})");
    REQUIRE(run("--config \"" + cfg.string() + "\" --q 2 lemma-audit " + outflag(dir)) == 0);

    const json out = read_report(dir).at("outputs");
    CHECK(out.at("instances") == 20);
    CHECK(out.at("verified") == 20);
    CHECK(out.at("all_ok") == true);
    CHECK(out.at("first_failure") == "");
}

TEST_CASE("cli: replay artifacts are identical across worker counts") {
    const fs::path a = fresh_dir("replay_w1");
    const fs::path b = fresh_dir("replay_w8");
    REQUIRE(run("replay --workers 1 " + outflag(a)) == 0);
    REQUIRE(run("replay --workers 8 " + outflag(b)) == 0);
    CHECK(read_text(a / "report.json") == read_text(b / "report.json"));
    CHECK(read_text(a / "stages.csv") == read_text(b / "stages.csv"));
}

TEST_CASE("cli: PARODO_OUT selects the output directory") {
    const fs::path dir = fresh_dir("env_out");
    REQUIRE(run("orbit", "PARODO_OUT=\"" + dir.string() + "\"") == 0);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "orbit.csv"));
    CHECK(read_report(dir).at("command") == "orbit");
}

TEST_CASE("cli: flags override the config file") {
    const fs::path dir = fresh_dir("precedence");
    const fs::path cfg = write_config("q2.json", R"({"q": 2, "seed": 9})");
    REQUIRE(run("--config \"" + cfg.string() + "\" --q 5 orbit " + outflag(dir)) == 0);

    const json rep = read_report(dir);
    CHECK(rep.at("config").at("q") == 5);    // flag wins
    CHECK(rep.at("config").at("seed") == 9); // config file beats the default
    CHECK(rep.at("flags").at("q") == 5);
    CHECK(rep.at("flags").at("config") == cfg.string());
}
