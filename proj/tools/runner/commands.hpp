#pragma once

#include "run_config.hpp"

#include "fractalqw/observables.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fqw::cli {

struct CommandResult {
    int exit_code = 0;
    std::vector<std::filesystem::path> files;  // data files, manifest excluded
    std::filesystem::path manifest;
    std::map<std::string, std::string> summary;
};

/// Test seam for oracle-check: called on every simulated field before it is
/// compared, so a harness can corrupt the engine output.
struct OracleHooks {
    std::function<void(double theta_h_deg, InterferenceField&)> perturb;
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"carpet",       "spread",      "alpha-diagram", "interference",
                                                   "entropy-map",  "trace-distance", "oracle-check"};
    return names;
}

CommandResult run_carpet(const RunConfig& config);
CommandResult run_spread(const RunConfig& config);
CommandResult run_alpha_diagram(const RunConfig& config);
CommandResult run_interference(const RunConfig& config);
CommandResult run_entropy_map(const RunConfig& config);
CommandResult run_trace_distance(const RunConfig& config);
/// Exit code 2 when any site differs from the closed form by more than 1e-12.
CommandResult run_oracle_check(const RunConfig& config, const OracleHooks& hooks = {});

/// Validates, resolves defaults, dispatches on config.subcommand, times the
/// run and writes the manifest. UsageError and InvariantViolation propagate;
/// an invariant violation still leaves a manifest recording it.
CommandResult run_command(const RunConfig& config, const OracleHooks& hooks = {});

/// Builds the config from `args` (program name excluded): defaults, then the
/// --config file, then flags. Throws UsageError.
RunConfig config_from_args(const std::vector<std::string>& args);

/// The whole CLI: parse, run, map exceptions to exit codes
/// (0 ok, 1 usage, 2 numerical invariant).
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fqw::cli
