#include "run_config.hpp"

#include "fractalqw/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fqw::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw UsageError(std::string(key) + ": expected a finite number, got '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view key, std::string_view text) {
    text = trim(text);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw UsageError(std::string(key) + ": expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_nonneg(std::string_view key, std::string_view text) {
    const auto v = parse_int(key, text);
    if (v < 0) throw UsageError(std::string(key) + ": must be >= 0");
    return v;
}

std::string join_grid(const std::vector<double>& grid) {
    std::string out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i) out += ',';
        out += format_number(grid[i]);
    }
    return out;
}

std::vector<double> or_default(const std::vector<double>& grid, std::string_view fallback) {
    return grid.empty() ? parse_grid(fallback) : grid;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc{} ? ptr : buf);
}

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        const auto item = trim(text.substr(pos, comma - pos));
        pos = comma + 1;
        if (item.empty()) {
            if (comma == text.size()) break;
            throw UsageError("grid: empty item in '" + std::string(text) + "'");
        }
        const auto c1 = item.find(':');
        if (c1 == std::string_view::npos) {
            out.push_back(parse_double("grid", item));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string_view::npos) throw UsageError("grid: range needs start:stop:step");
        const double start = parse_double("grid", item.substr(0, c1));
        const double stop = parse_double("grid", item.substr(c1 + 1, c2 - c1 - 1));
        const double stride = parse_double("grid", item.substr(c2 + 1));
        if (!(stride > 0.0) || stop < start) throw UsageError("grid: range needs step > 0 and stop >= start");
        // integer multiples of the step, so 0:1:0.1 hits 1 exactly
        const auto n = static_cast<std::int64_t>(std::floor((stop - start) / stride * (1 + 1e-12)));
        if (n > 1'000'000) throw UsageError("grid: range has too many points");
        for (std::int64_t k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * stride);
    }
    if (out.empty()) throw UsageError("grid: no values in '" + std::string(text) + "'");
    return out;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "mode",        "theta_deg",    "theta_h_deg",  "theta_f_deg", "gamma_deg",  "phi_deg",
        "x0",          "t_max",        "fit_lo",       "fit_hi",      "fit_samples", "zero_tol",
        "t0",          "cadence",      "theta_grid",   "theta_h_grid", "theta_f_grid", "gamma_grid",
        "phi_grid",    "out_dir",      "format",       "workers",     "carpet_cap", "oracle_t_max"};
    return keys;
}

void set_key(RunConfig& c, std::string_view key, std::string_view raw) {
    const std::string_view value = trim(raw);
    if (key == "mode") {
        const auto mode = parse_walk_mode(value);
        if (!mode) throw UsageError("mode: expected fractal, uniform-hadamard or uniform-fourier");
        c.mode = *mode;
    } else if (key == "theta_deg") {
        c.theta_h_deg = c.theta_f_deg = parse_double(key, value);
    } else if (key == "theta_h_deg") {
        c.theta_h_deg = parse_double(key, value);
    } else if (key == "theta_f_deg") {
        c.theta_f_deg = parse_double(key, value);
    } else if (key == "gamma_deg") {
        c.gamma_deg = parse_double(key, value);
    } else if (key == "phi_deg") {
        c.phi_deg = parse_double(key, value);
    } else if (key == "x0") {
        c.x0 = parse_int(key, value);
    } else if (key == "t_max") {
        c.t_max = parse_int(key, value);
    } else if (key == "fit_lo") {
        c.fit_lo = parse_int(key, value);
    } else if (key == "fit_hi") {
        c.fit_hi = parse_int(key, value);
    } else if (key == "fit_samples") {
        c.fit_samples = static_cast<std::size_t>(parse_nonneg(key, value));
    } else if (key == "zero_tol") {
        c.zero_tol = parse_double(key, value);
    } else if (key == "t0") {
        c.t0 = parse_nonneg(key, value);
    } else if (key == "cadence") {
        c.cadence = parse_int(key, value);
    } else if (key == "theta_grid") {
        c.theta_grid = parse_grid(value);
    } else if (key == "theta_h_grid") {
        c.theta_h_grid = parse_grid(value);
    } else if (key == "theta_f_grid") {
        c.theta_f_grid = parse_grid(value);
    } else if (key == "gamma_grid") {
        c.gamma_grid = parse_grid(value);
    } else if (key == "phi_grid") {
        c.phi_grid = parse_grid(value);
    } else if (key == "out_dir") {
        if (value.empty()) throw UsageError("out_dir: empty path");
        c.out_dir = std::string(value);
    } else if (key == "format") {
        if (value == "csv") {
            c.format = OutputFormat::Csv;
        } else if (value == "json") {
            c.format = OutputFormat::Json;
        } else {
            throw UsageError("format: expected csv or json");
        }
    } else if (key == "workers") {
        c.workers = static_cast<unsigned>(parse_nonneg(key, value));
    } else if (key == "carpet_cap") {
        c.carpet_cap = parse_nonneg(key, value);
    } else if (key == "oracle_t_max") {
        c.oracle_t_max = parse_int(key, value);
    } else {
        throw UsageError("unknown config key '" + std::string(key) + "'");
    }
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
    std::map<std::string, std::string> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto eol = std::min(text.find('\n', pos), text.size());
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = std::string(trim(line.substr(0, eq)));
        if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
        out[key] = std::string(trim(line.substr(eq + 1)));
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

EvolveConfig RunConfig::evolve_config() const {
    EvolveConfig e;
    e.mode = mode;
    e.coins = CoinParams::from_degrees(theta_h_deg, theta_f_deg);
    e.gamma = deg_to_rad(gamma_deg);
    e.phi = deg_to_rad(phi_deg);
    e.x0 = x0;
    e.t_max = t_max;
    return e;
}

FitOptions RunConfig::fit_options() const {
    FitOptions f;
    if (fit_lo || fit_hi) {
        const auto d = default_fit_window(t_max);
        f.window = FitWindow{fit_lo.value_or(d.lo), fit_hi.value_or(d.hi)};
    }
    f.samples = fit_samples;
    f.zero_tol = zero_tol;
    return f;
}

void RunConfig::validate() const {
    if (t_max < 1) throw UsageError("t_max must be >= 1");
    if (cadence < 1) throw UsageError("cadence must be >= 1");
    if (fit_samples < 3) throw UsageError("fit_samples must be >= 3");
    if (!(zero_tol >= 0.0)) throw UsageError("zero_tol must be >= 0");
    if (t0 && *t0 > t_max) throw UsageError("t0 exceeds t_max");
    resolve_window(fit_options(), t_max);
}

RunConfig RunConfig::resolved() const {
    RunConfig r = *this;
    r.theta_grid = or_default(theta_grid, "0:180:5");
    r.theta_h_grid = or_default(theta_h_grid, subcommand == "oracle-check" ? "5,15,30,45,60,85" : "0:90:5");
    r.theta_f_grid = or_default(theta_f_grid, "0:90:5");
    r.gamma_grid = gamma_grid.empty() ? std::vector<double>{gamma_deg} : gamma_grid;
    r.phi_grid = phi_grid.empty() ? std::vector<double>{phi_deg} : phi_grid;
    const auto w = resolve_window(fit_options(), t_max);
    r.fit_lo = w.lo;
    r.fit_hi = w.hi;
    r.t0 = resolved_t0();
    r.workers = resolved_workers();
    return r;
}

std::map<std::string, std::string> describe(const RunConfig& c) {
    auto opt = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string("default"); };
    return {
        {"subcommand", c.subcommand},
        {"mode", std::string(to_string(c.mode))},
        {"theta_h_deg", format_number(c.theta_h_deg)},
        {"theta_f_deg", format_number(c.theta_f_deg)},
        {"gamma_deg", format_number(c.gamma_deg)},
        {"phi_deg", format_number(c.phi_deg)},
        {"x0", std::to_string(c.x0)},
        {"t_max", std::to_string(c.t_max)},
        {"fit_lo", opt(c.fit_lo)},
        {"fit_hi", opt(c.fit_hi)},
        {"fit_samples", std::to_string(c.fit_samples)},
        {"zero_tol", format_number(c.zero_tol)},
        {"t0", opt(c.t0)},
        {"cadence", std::to_string(c.cadence)},
        {"theta_grid", join_grid(c.theta_grid)},
        {"theta_h_grid", join_grid(c.theta_h_grid)},
        {"theta_f_grid", join_grid(c.theta_f_grid)},
        {"gamma_grid", join_grid(c.gamma_grid)},
        {"phi_grid", join_grid(c.phi_grid)},
        {"out_dir", c.out_dir.string()},
        {"format", c.format == OutputFormat::Csv ? "csv" : "json"},
        {"workers", std::to_string(c.workers)},
        {"carpet_cap", std::to_string(c.carpet_cap)},
        {"oracle_t_max", std::to_string(c.oracle_t_max)},
    };
}

}  // namespace fqw::cli
