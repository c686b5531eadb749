#pragma once

namespace parodo {

/// Parses argv, dispatches to one of the subcommands (orbit, dist, replay,
/// kset, bratteli, lemma-audit), writes the report, and returns the process
/// exit code: 0 success, 1 usage/config error, 2 incomplete verification,
/// 3 budget exceeded without a fallback.
int run_cli(int argc, char** argv);

} // namespace parodo
