#include "parodo/report.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace parodo {

namespace {

std::uint64_t json_u64(const nlohmann::json& v, const char* what) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError(std::string("config: ") + what + " must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < 0) throw ConfigError(std::string("config: ") + what + " must be nonnegative");
    return static_cast<std::uint64_t>(x);
}

} // namespace

RunMode parse_run_mode(const std::string& s) {
    if (s == "exact") return RunMode::exact;
    if (s == "mc" || s == "monte-carlo" || s == "monte_carlo") return RunMode::monte_carlo;
    if (s == "auto") return RunMode::auto_mode;
    throw ConfigError("mode must be one of exact, mc, auto (got '" + s + "')");
}

std::string run_mode_str(RunMode m) {
    switch (m) {
        case RunMode::exact: return "exact";
        case RunMode::monte_carlo: return "mc";
        default: return "auto";
    }
}

nlohmann::json RunConfig::section(const std::string& name) const {
    if (raw.is_object() && raw.contains(name)) {
        if (!raw.at(name).is_object())
            throw ConfigError("config: section '" + name + "' must be an object");
        return raw.at(name);
    }
    return nlohmann::json::object();
}

nlohmann::ordered_json RunConfig::common_echo() const {
    nlohmann::ordered_json j;
    j["q"] = q;
    j["beta"] = rational_str(beta);
    j["delta"] = rational_str(delta);
    j["seed"] = seed;
    j["mode"] = run_mode_str(mode);
    j["state_budget"] = state_budget;
    j["mc_samples"] = mc_samples;
    return j;
}

RunConfig make_run_config(const CliOptions& cli) {
    RunConfig rc;

    if (cli.config_path) {
        std::ifstream in(*cli.config_path);
        if (!in) throw ConfigError("config: cannot open '" + *cli.config_path + "'");
        try {
            in >> rc.raw;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config: malformed JSON in '" + *cli.config_path +
                              "': " + e.what());
        }
        if (!rc.raw.is_object()) throw ConfigError("config: top level must be an object");

        if (rc.raw.contains("q")) rc.q = rc.raw.at("q").get<std::int64_t>();
        if (rc.raw.contains("beta")) rc.beta = rational_parse(rc.raw.at("beta").get<std::string>());
        if (rc.raw.contains("delta"))
            rc.delta = rational_parse(rc.raw.at("delta").get<std::string>());
        if (rc.raw.contains("seed")) rc.seed = json_u64(rc.raw.at("seed"), "seed");
        if (rc.raw.contains("workers")) {
            rc.workers = rc.raw.at("workers").get<int>();
            if (rc.workers < 1) throw ConfigError("config: workers must be >= 1");
        }
        if (rc.raw.contains("mode"))
            rc.mode = parse_run_mode(rc.raw.at("mode").get<std::string>());
        if (rc.raw.contains("state_budget"))
            rc.state_budget = json_u64(rc.raw.at("state_budget"), "state_budget");
        if (rc.raw.contains("mc_samples"))
            rc.mc_samples = json_u64(rc.raw.at("mc_samples"), "mc_samples");
        if (rc.raw.contains("out_dir")) rc.out_dir = rc.raw.at("out_dir").get<std::string>();
    } else {
        rc.raw = nlohmann::json::object();
    }

    if (const char* env_out = std::getenv("PARODO_OUT"); env_out && *env_out)
        rc.out_dir = env_out;
    if (const char* env_workers = std::getenv("PARODO_WORKERS"); env_workers && *env_workers) {
        try {
            rc.workers = std::stoi(env_workers);
        } catch (const std::exception&) {
            throw ConfigError("PARODO_WORKERS must be an integer");
        }
        if (rc.workers < 1) throw ConfigError("PARODO_WORKERS must be >= 1");
    }

    if (cli.q) rc.q = *cli.q;
    if (cli.beta) rc.beta = rational_parse(*cli.beta);
    if (cli.delta) rc.delta = rational_parse(*cli.delta);
    if (cli.depth) rc.depth = *cli.depth;
    if (cli.seed) rc.seed = *cli.seed;
    if (cli.workers) {
        rc.workers = *cli.workers;
        if (rc.workers < 1) throw ConfigError("--workers must be >= 1");
    }
    if (cli.mode) rc.mode = parse_run_mode(*cli.mode);
    if (cli.out_dir) rc.out_dir = *cli.out_dir;

    if (rc.q < 2) throw ConfigError("config: q must be >= 2");
    if (rc.beta <= 0 || rc.beta >= 1) throw ConfigError("config: beta must lie in (0, 1)");
    if (rc.delta <= 0) throw ConfigError("config: delta must be positive");
    return rc;
}

ReportWriter::ReportWriter(std::string command, std::string out_dir)
    : command_(std::move(command)), dir_(std::move(out_dir)) {
    std::filesystem::create_directories(dir_);
    config_ = nlohmann::ordered_json::object();
    flags_ = nlohmann::ordered_json::object();
    outputs_ = nlohmann::ordered_json::object();
}

std::string ReportWriter::write_file(const std::string& name, const std::string& content) {
    const std::filesystem::path p = std::filesystem::path(dir_) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << content;
    out.close();
    files_.push_back(name);
    return p.string();
}

std::string ReportWriter::finalize() {
    nlohmann::ordered_json doc;
    doc["version"] = "1.0.0";
    doc["command"] = command_;
    doc["config"] = config_;
    doc["flags"] = flags_;
    doc["outputs"] = outputs_;
    doc["files"] = files_;

    const std::filesystem::path p = std::filesystem::path(dir_) / "report.json";
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << doc.dump(2) << "\n";
    out.close();
    return p.string();
}

nlohmann::ordered_json stage_json(const StageRecord& st) {
    nlohmann::ordered_json j;
    j["label"] = st.label;
    j["lhs"] = st.lhs;
    j["rhs"] = st.rhs;
    j["exactness"] = st.exactness;
    j["pass"] = st.pass;
    j["borderline"] = st.borderline;
    j["note"] = st.note;
    return j;
}

nlohmann::ordered_json search_json(const SearchTrace& tr) {
    nlohmann::ordered_json j;
    j["ik"] = tr.ik;
    j["scale_gate"] = tr.pass8;
    j["window_gate"] = tr.pass10;
    j["tail_gate"] = tr.pass11;
    j["note"] = tr.note;
    return j;
}

} // namespace parodo
