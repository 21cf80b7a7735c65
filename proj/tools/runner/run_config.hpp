#pragma once

#include "fractalqw/analysis.hpp"
#include "fractalqw/walker.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fqw::cli {

enum class OutputFormat { Csv, Json };

/// Everything a subcommand needs. Angles are in degrees throughout.
struct RunConfig {
    std::string subcommand;
    WalkMode mode = WalkMode::Fractal;
    double theta_h_deg = 45.0;
    double theta_f_deg = 45.0;
    double gamma_deg = 90.0;
    double phi_deg = 90.0;
    std::int64_t x0 = 0;
    std::int64_t t_max = 1000;

    std::optional<std::int64_t> fit_lo;  // default t_max / 100
    std::optional<std::int64_t> fit_hi;  // default t_max
    std::size_t fit_samples = 50;
    double zero_tol = 1e-12;
    std::optional<std::int64_t> t0;  // default t_max / 2
    std::int64_t cadence = 1;       // sampling stride for per-step series

    std::vector<double> theta_grid;    // alpha-diagram
    std::vector<double> theta_h_grid;  // entropy-map, oracle-check
    std::vector<double> theta_f_grid;  // entropy-map
    std::vector<double> gamma_grid;    // entropy-map
    std::vector<double> phi_grid;      // entropy-map

    std::filesystem::path out_dir = "out";
    OutputFormat format = OutputFormat::Csv;
    unsigned workers = 0;  // 0 = available parallelism
    std::int64_t carpet_cap = 2000;
    std::int64_t oracle_t_max = 5;

    EvolveConfig evolve_config() const;
    FitOptions fit_options() const;
    std::int64_t resolved_t0() const noexcept { return t0.value_or(t_max / 2); }
    unsigned resolved_workers() const noexcept { return workers == 0 ? default_workers() : workers; }

    /// Checks the cross-field invariants; throws UsageError.
    void validate() const;

    /// Copy with every default made explicit: grids filled in for the
    /// subcommand, fit window, t0 and worker count resolved.
    RunConfig resolved() const;
};

/// Every key accepted by set_key, in a stable order.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual form. Keys are the RunConfig field names
/// (theta_h_deg, t_max, ...) plus `theta_deg`, which sets theta_h_deg and
/// theta_f_deg together. Throws UsageError on unknown keys or bad values.
void set_key(RunConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` text; `#` starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Grid syntax: "a,b,c" or "start:stop:step" (stop inclusive), or a mix
/// separated by commas.
std::vector<double> parse_grid(std::string_view text);

/// Key/value view of a config, as recorded in manifests.
std::map<std::string, std::string> describe(const RunConfig& config);

std::string format_number(double v);

}  // namespace fqw::cli
