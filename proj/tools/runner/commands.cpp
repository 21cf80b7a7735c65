#include "commands.hpp"

#include "writers.hpp"

#include "fractalqw/analysis.hpp"
#include "fractalqw/errors.hpp"
#include "fractalqw/evolve.hpp"
#include "fractalqw/fractal_pattern.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace fqw::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOracleTolerance = 1e-12;

void require_cap(const RunConfig& c) {
    if (c.t_max > c.carpet_cap) {
        throw UsageError(c.subcommand + ": t_max " + std::to_string(c.t_max) + " exceeds the matrix export cap " +
                         std::to_string(c.carpet_cap) + " (raise carpet_cap to override)");
    }
}

Matrix empty_matrix(const RunConfig& c) {
    Matrix m;
    m.x_min = c.x0 - c.t_max;
    m.width = 2 * c.t_max + 1;
    return m;
}

Table fit_table(std::string_view quantity, const std::optional<PowerLawFit>& fit, const std::string& error,
                std::size_t zero_samples, FitWindow window, bool bounded) {
    Table table;
    table.columns = {"quantity",     "exponent", "exponent_stderr", "intercept",   "intercept_stderr", "fit_lo",
                     "fit_hi",       "samples",  "zero_samples",    "bounded",     "error"};
    table.add({std::string(quantity), fit ? fit->exponent : kNaN, fit ? fit->exponent_stderr : kNaN,
               fit ? fit->intercept : kNaN, fit ? fit->intercept_stderr : kNaN, window.lo, window.hi,
               static_cast<std::int64_t>(fit ? fit->sample_times.size() : 0),
               static_cast<std::int64_t>(zero_samples), static_cast<std::int64_t>(bounded), error});
    return table;
}

void summarize_fit(std::map<std::string, std::string>& summary, std::string_view name,
                   const std::optional<PowerLawFit>& fit, const std::string& error) {
    if (fit) {
        summary[std::string(name)] = format_number(fit->exponent);
        summary[std::string(name) + "_stderr"] = format_number(fit->exponent_stderr);
    } else {
        summary[std::string(name) + "_error"] = error;
    }
}

}  // namespace

CommandResult run_carpet(const RunConfig& c) {
    require_cap(c);
    const auto schedule = SampleSchedule::every(c.cadence);
    Matrix probability = empty_matrix(c);
    const SnapshotHook hooks[] = {{schedule, [&](const StepContext& ctx) {
                                       const auto p = position_distribution(ctx.state);
                                       std::vector<double> row(static_cast<std::size_t>(probability.width), 0.0);
                                       if (p.max_value > 0.0) {
                                           for (std::size_t j = 0; j < row.size(); ++j) {
                                               row[j] = p.at(probability.x_min + static_cast<std::int64_t>(j)) /
                                                        p.max_value;
                                           }
                                       }
                                       probability.t.push_back(ctx.t);
                                       probability.rows.push_back(std::move(row));
                                   }}};
    evolve(c.evolve_config(), {}, hooks);

    Matrix bits = empty_matrix(c);
    const auto wanted = schedule.resolve(c.t_max);
    FractalRow row;
    std::vector<std::uint8_t> scratch;
    std::size_t next = 0;
    for (std::int64_t t = 0; t <= c.t_max && next < wanted.size(); ++t) {
        if (t > 0) row.advance(scratch);
        if (wanted[next] != t) continue;
        ++next;
        std::vector<double> values(static_cast<std::size_t>(bits.width));
        for (std::size_t j = 0; j < values.size(); ++j) {
            values[j] = row.bit(bits.x_min + static_cast<std::int64_t>(j) - c.x0);
        }
        bits.t.push_back(t);
        bits.rows.push_back(std::move(values));
    }

    CommandResult result;
    result.files.push_back(write_matrix(c.out_dir, "carpet_probability", probability, c.format));
    result.files.push_back(write_matrix(c.out_dir, "carpet_bits", bits, c.format));
    result.summary["rows"] = std::to_string(probability.rows.size());
    result.summary["columns"] = std::to_string(probability.width);
    return result;
}

CommandResult run_spread(const RunConfig& c) {
    const auto fit = c.fit_options();
    const auto spread = spread_analysis(c.evolve_config(), fit);

    Table series;
    series.columns = {"t", "m2"};
    for (std::size_t i = 0; i < spread.m2.t.size(); ++i) series.add({spread.m2.t[i], spread.m2.values[i]});

    CommandResult result;
    result.files.push_back(write_table(c.out_dir, "spread_m2", series, c.format));
    result.files.push_back(write_table(
        c.out_dir, "spread_fit",
        fit_table("alpha", spread.fit, spread.fit_error, spread.zero_samples, resolve_window(fit, c.t_max),
                  spread.bounded),
        c.format));
    summarize_fit(result.summary, "alpha", spread.fit, spread.fit_error);
    result.summary["bounded"] = spread.bounded ? "true" : "false";
    return result;
}

CommandResult run_alpha_diagram(const RunConfig& c) {
    const auto rows = alpha_diagram(c.theta_grid, c.t_max, c.evolve_config(), c.fit_options(), c.resolved_workers());
    Table table;
    table.columns = {"theta_deg", "alpha", "alpha_stderr", "intercept", "bounded", "error"};
    std::size_t failed = 0;
    for (const auto& r : rows) {
        const bool ok = r.error.empty();
        failed += ok ? 0 : 1;
        table.add({r.theta_deg, ok ? r.alpha : kNaN, ok ? r.alpha_stderr : kNaN, ok ? r.intercept : kNaN,
                   static_cast<std::int64_t>(r.bounded), r.error});
    }
    CommandResult result;
    result.files.push_back(write_table(c.out_dir, "alpha_diagram", table, c.format));
    result.summary["points"] = std::to_string(rows.size());
    result.summary["failed_points"] = std::to_string(failed);
    return result;
}

CommandResult run_interference(const RunConfig& c) {
    require_cap(c);
    const auto config = c.evolve_config();
    Matrix mu = empty_matrix(c);
    Matrix vis = empty_matrix(c);
    const SnapshotHook hooks[] = {
        {SampleSchedule::every(c.cadence), [&](const StepContext& ctx) {
             const auto width = static_cast<std::size_t>(mu.width);
             std::vector<double> mu_row(width, 0.0);
             std::vector<double> vis_row(width, kUndefinedVisibility);
             const InterferenceField field =
                 ctx.previous == nullptr
                     ? initial_interference(c.x0)
                     : interference_degree(*ctx.previous, ctx.previous_row, config.coins, config.mode);
             for (std::size_t j = 0; j < width; ++j) {
                 const std::int64_t x = mu.x_min + static_cast<std::int64_t>(j);
                 mu_row[j] = field.at(x);
                 if (ctx.previous != nullptr) {
                     const auto b = interference_branches(*ctx.previous, ctx.previous_row, config.coins,
                                                          config.mode, x);
                     vis_row[j] = visibility(b.p_max(), b.p_min()).value_or(kUndefinedVisibility);
                 }
             }
             mu.t.push_back(ctx.t);
             mu.rows.push_back(std::move(mu_row));
             vis.t.push_back(ctx.t);
             vis.rows.push_back(std::move(vis_row));
         }}};
    evolve(config, {}, hooks);

    CommandResult result;
    result.files.push_back(write_matrix(c.out_dir, "interference_mu", mu, c.format));
    result.files.push_back(write_matrix(c.out_dir, "interference_visibility", vis, c.format));
    result.summary["rows"] = std::to_string(mu.rows.size());
    result.summary["columns"] = std::to_string(mu.width);
    return result;
}

CommandResult run_entropy_map(const RunConfig& c) {
    const EntropyGrid grid{c.theta_h_grid, c.theta_f_grid, c.gamma_grid, c.phi_grid};
    const auto points = entropy_map(grid, c.evolve_config(), c.resolved_t0(), c.resolved_workers());
    Table table;
    table.columns = {"theta_h_deg", "theta_f_deg", "gamma_deg", "phi_deg", "mean_entropy", "error"};
    std::size_t failed = 0;
    for (const auto& p : points) {
        const bool ok = p.error.empty();
        failed += ok ? 0 : 1;
        table.add({p.theta_h_deg, p.theta_f_deg, p.gamma_deg, p.phi_deg, ok ? p.mean_entropy : kNaN, p.error});
    }
    CommandResult result;
    result.files.push_back(write_table(c.out_dir, "entropy_map", table, c.format));
    result.summary["points"] = std::to_string(points.size());
    result.summary["failed_points"] = std::to_string(failed);
    return result;
}

CommandResult run_trace_distance(const RunConfig& c) {
    const auto fit = c.fit_options();
    const auto td = trace_distance_analysis(c.evolve_config(), fit);

    Table series;
    series.columns = {"t", "trace_distance"};
    for (std::size_t i = 0; i < td.distance.t.size(); ++i) {
        const auto t = td.distance.t[i];
        if (t % c.cadence == 0 || t == c.t_max) series.add({t, td.distance.values[i]});
    }
    const std::span<const double> after_start(td.distance.values.data() + 1, td.distance.values.size() - 1);

    CommandResult result;
    result.files.push_back(write_table(c.out_dir, "trace_distance", series, c.format));
    result.files.push_back(write_table(
        c.out_dir, "trace_distance_fit",
        fit_table("beta", td.fit, td.fit_error, td.zero_samples, resolve_window(fit, c.t_max), false), c.format));
    summarize_fit(result.summary, "beta", td.fit, td.fit_error);
    result.summary["increases"] = std::to_string(count_increases(after_start));
    return result;
}

CommandResult run_oracle_check(const RunConfig& c, const OracleHooks& hooks) {
    if (c.oracle_t_max < 0 || c.oracle_t_max > 5) {
        throw UsageError("oracle-check: closed forms are available for t <= 5 only, requested oracle_t_max = " +
                         std::to_string(c.oracle_t_max));
    }
    Table table;
    table.columns = {"theta_h_deg", "t", "x", "simulated", "analytic", "abs_diff", "pass"};
    std::size_t failures = 0;
    double worst = 0.0;

    for (double theta : c.theta_h_grid) {
        EvolveConfig config;
        config.mode = WalkMode::Fractal;
        config.coins = CoinParams::from_degrees(theta, 0.0);
        config.gamma = kPi / 2;
        config.phi = 0.0;
        config.x0 = c.x0;
        config.t_max = std::max<std::int64_t>(1, c.oracle_t_max);

        const SnapshotHook snapshot[] = {{SampleSchedule::every(1), [&](const StepContext& ctx) {
                                              if (ctx.t > c.oracle_t_max) return;
                                              InterferenceField sim =
                                                  ctx.previous == nullptr
                                                      ? initial_interference(c.x0)
                                                      : interference_degree(*ctx.previous, ctx.previous_row,
                                                                            config.coins, config.mode);
                                              if (hooks.perturb) hooks.perturb(theta, sim);
                                              const auto oracle =
                                                  analytic_interference_oracle(deg_to_rad(theta), ctx.t);
                                              for (std::int64_t x = -ctx.t; x <= ctx.t; ++x) {
                                                  const double s = sim.at(c.x0 + x);
                                                  const double a = oracle.at(x);
                                                  const double d = std::abs(s - a);
                                                  const bool pass = d <= kOracleTolerance;
                                                  failures += pass ? 0 : 1;
                                                  worst = std::max(worst, d);
                                                  table.add({theta, ctx.t, x, s, a, d, static_cast<std::int64_t>(pass)});
                                              }
                                          }}};
        evolve(config, {}, snapshot);
    }

    CommandResult result;
    result.exit_code = failures == 0 ? 0 : 2;
    result.files.push_back(write_table(c.out_dir, "oracle_check", table, c.format));
    result.summary["comparisons"] = std::to_string(table.rows.size());
    result.summary["failures"] = std::to_string(failures);
    result.summary["max_abs_diff"] = format_number(worst);
    result.summary["status"] = failures == 0 ? "pass" : "fail";
    return result;
}

CommandResult run_command(const RunConfig& input, const OracleHooks& hooks) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), input.subcommand) == names.end()) {
        throw UsageError("unknown subcommand '" + input.subcommand + "'");
    }
    input.validate();
    const RunConfig c = input.resolved();

    Manifest manifest{c, {}, 0.0, 0, {}};
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

    CommandResult result;
    try {
        if (c.subcommand == "carpet") {
            result = run_carpet(c);
        } else if (c.subcommand == "spread") {
            result = run_spread(c);
        } else if (c.subcommand == "alpha-diagram") {
            result = run_alpha_diagram(c);
        } else if (c.subcommand == "interference") {
            result = run_interference(c);
        } else if (c.subcommand == "entropy-map") {
            result = run_entropy_map(c);
        } else if (c.subcommand == "trace-distance") {
            result = run_trace_distance(c);
        } else {
            result = run_oracle_check(c, hooks);
        }
    } catch (const InvariantViolation& e) {
        manifest.exit_code = 2;
        manifest.summary["error"] = e.what();
        manifest.wall_time_s = elapsed();
        write_manifest(manifest);
        throw;
    }
    manifest.files = result.files;
    manifest.exit_code = result.exit_code;
    manifest.summary = result.summary;
    manifest.wall_time_s = elapsed();
    result.manifest = write_manifest(manifest);
    return result;
}

namespace {

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--mode", "mode", "fractal | uniform-hadamard | uniform-fourier"},
    {"--theta", "theta_deg", "Both coin angles, degrees"},
    {"--theta-h", "theta_h_deg", "Hadamard-family coin angle, degrees"},
    {"--theta-f", "theta_f_deg", "Fourier-family coin angle, degrees"},
    {"--gamma", "gamma_deg", "Initial coin state polar angle, degrees"},
    {"--phi", "phi_deg", "Initial coin state phase, degrees"},
    {"--x0", "x0", "Initial site"},
    {"--t-max", "t_max", "Number of steps"},
    {"--fit-lo", "fit_lo", "Fit window start (default t_max/100)"},
    {"--fit-hi", "fit_hi", "Fit window end (default t_max)"},
    {"--fit-samples", "fit_samples", "Log-spaced samples in the fit window"},
    {"--zero-tol", "zero_tol", "Values at or below this are dropped before a log-log fit"},
    {"--t0", "t0", "Start of the entropy average (default t_max/2)"},
    {"--cadence", "cadence", "Row stride for per-step outputs"},
    {"--theta-grid", "theta_grid", "alpha-diagram angles, degrees: a,b,c or start:stop:step"},
    {"--theta-h-grid", "theta_h_grid", "entropy-map / oracle-check Hadamard angles, degrees"},
    {"--theta-f-grid", "theta_f_grid", "entropy-map Fourier angles, degrees"},
    {"--gamma-grid", "gamma_grid", "entropy-map initial polar angles, degrees"},
    {"--phi-grid", "phi_grid", "entropy-map initial phases, degrees"},
    {"--out", "out_dir", "Output directory"},
    {"--format", "format", "csv | json"},
    {"--workers", "workers", "Sweep threads (0 = all cores)"},
    {"--carpet-cap", "carpet_cap", "Largest t_max for matrix exports"},
    {"--oracle-t-max", "oracle_t_max", "Last step checked by oracle-check (<= 5)"},
};

struct ParsedCli {
    std::optional<RunConfig> config;
    std::string message;  // help or version text when config is empty
};

ParsedCli parse_cli(const std::vector<std::string>& args) {
    CLI::App app{"Quantum walks whose coin follows a Sierpinski-gasket carpet", "fqw"};
    app.set_version_flag("--version", std::string(code_version()));
    std::string config_path;
    app.add_option("--config", config_path, "Flat key = value config file");

    std::map<std::string, std::string> raw;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    for (const auto& spec : kFlags) options.emplace_back(spec.key, app.add_option(spec.flag, raw[spec.key], spec.help));

    const std::map<std::string, std::string> about = {
        {"carpet", "Normalized P_t(x) matrix and the carpet bits"},
        {"spread", "Second moment series and its power-law fit"},
        {"alpha-diagram", "Spreading exponent over a theta grid"},
        {"interference", "Degree of interference and visibility matrices"},
        {"entropy-map", "Asymptotic coin entanglement entropy over angle grids"},
        {"trace-distance", "Consecutive coin-state trace distance and its decay fit"},
        {"oracle-check", "Compare early-time interference with closed forms"},
    };
    for (const auto& name : subcommands()) app.add_subcommand(name, about.at(name))->fallthrough();
    app.require_subcommand(1);

    std::vector<const char*> argv{"fqw"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        std::ostringstream out;
        std::ostringstream err;
        app.exit(e, out, err);
        return {std::nullopt, out.str() + err.str()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig config;
    config.subcommand = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) {
        auto file = read_config_file(config_path);
        for (const auto& key : config_keys()) {
            if (auto it = file.find(key); it != file.end()) {
                set_key(config, key, it->second);
                file.erase(it);
            }
        }
        if (!file.empty()) throw UsageError("unknown config key '" + file.begin()->first + "' in " + config_path);
    }
    for (const auto& key : config_keys()) {
        for (const auto& [k, opt] : options) {
            if (k == key && opt->count() > 0) set_key(config, key, raw.at(key));
        }
    }
    return {config, {}};
}

}  // namespace

RunConfig config_from_args(const std::vector<std::string>& args) {
    auto parsed = parse_cli(args);
    if (!parsed.config) throw UsageError("no run requested");
    return *parsed.config;
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        auto parsed = parse_cli(args);
        if (!parsed.config) {
            out << parsed.message;
            return 0;
        }
        const auto result = run_command(*parsed.config);
        for (const auto& f : result.files) out << f.string() << '\n';
        out << result.manifest.string() << '\n';
        for (const auto& [k, v] : result.summary) out << k << ": " << v << '\n';
        return result.exit_code;
    } catch (const InvariantViolation& e) {
        err << "fqw: numerical invariant violated: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "fqw: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace fqw::cli
