#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parodo/krieger.hpp"

namespace parodo {

/// Command-line overrides (highest precedence).
struct CliOptions {
    std::optional<std::string> config_path;
    std::optional<std::int64_t> q;
    std::optional<std::string> beta;
    std::optional<std::string> delta;
    std::optional<int> depth;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> mode;
    std::optional<std::string> out_dir;
};

/// Effective run configuration: defaults, then the config file, then the
/// PARODO_OUT / PARODO_WORKERS environment variables, then CLI flags.
struct RunConfig {
    std::int64_t q = 5;
    Rational beta{1, 4};
    Rational delta{3};
    std::uint64_t seed = 1;
    int workers = 1;
    RunMode mode = RunMode::auto_mode;
    std::uint64_t state_budget = 10'000'000ull;
    std::uint64_t mc_samples = 200'000ull;
    std::string out_dir = "parodo-out";
    std::optional<int> depth; // --depth, meaning is per command

    nlohmann::json raw; // full config file for per-command sections

    /// Per-command section of the config file ({} when absent).
    nlohmann::json section(const std::string& name) const;

    /// Semantic parameters common to every report; excludes workers and
    /// out_dir so runs differing only in parallelism or location are
    /// byte-identical.
    nlohmann::ordered_json common_echo() const;
};

RunConfig make_run_config(const CliOptions& cli);

RunMode parse_run_mode(const std::string& s);
std::string run_mode_str(RunMode m);

/// Collects a command's outputs and writes the canonical report.json plus
/// any data files into the output directory. No timing data ever lands in
/// the report bytes.
class ReportWriter {
  public:
    ReportWriter(std::string command, std::string out_dir);

    nlohmann::ordered_json& config() { return config_; }
    nlohmann::ordered_json& flags() { return flags_; }
    nlohmann::ordered_json& outputs() { return outputs_; }

    /// Writes a data file into the output directory; returns its path and
    /// records it in the report's file list.
    std::string write_file(const std::string& name, const std::string& content);

    /// Writes report.json and returns its path.
    std::string finalize();

  private:
    std::string command_;
    std::string dir_;
    nlohmann::ordered_json config_, flags_, outputs_;
    std::vector<std::string> files_;
};

// JSON rendering helpers shared by the commands.
nlohmann::ordered_json stage_json(const StageRecord& st);
nlohmann::ordered_json search_json(const SearchTrace& tr);

} // namespace parodo
