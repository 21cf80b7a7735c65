#include "doctest.h"

#include "commands.hpp"
#include "run_config.hpp"
#include "writers.hpp"

#include "fractalqw/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace fqw;
using namespace fqw::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
  public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("fqw_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

  private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw std::runtime_error("no column " + name);
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    Csv csv;
    std::string line;
    std::getline(in, line);
    csv.header = split(line);
    while (std::getline(in, line)) csv.rows.push_back(split(line));
    return csv;
}

int run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    return run_main(args, out, err);
}

RunConfig small(const std::string& sub, const fs::path& out) {
    RunConfig c;
    c.subcommand = sub;
    c.out_dir = out;
    c.t_max = 300;
    c.theta_grid = {15, 45, 90};
    c.theta_h_grid = {0, 45};
    c.theta_f_grid = {45, 90};
    c.phi_grid = {0, 90};
    return c;
}

}  // namespace

TEST_CASE("grid syntax") {
    CHECK(parse_grid("1,2,3") == std::vector<double>{1, 2, 3});
    CHECK(parse_grid("0:90:30") == std::vector<double>{0, 30, 60, 90});
    CHECK(parse_grid(" 5 , 10:20:5") == std::vector<double>{5, 10, 15, 20});
    const auto fine = parse_grid("0:1:0.1");
    CHECK(fine.size() == 11);
    CHECK(fine.back() == doctest::Approx(1.0));
    CHECK(parse_grid("0:10:4") == std::vector<double>{0, 4, 8});
    for (const char* bad : {"", "a", "1:2", "0:10:-1", "10:0:1", "1,,2", "1:2:0"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_grid(bad), UsageError);
    }
}

TEST_CASE("config text") {
    const auto kv = parse_config_text("# comment\n\n t_max = 40 \ntheta_deg=30 # trailing\nout_dir = a b\n");
    CHECK(kv.size() == 3);
    CHECK(kv.at("t_max") == "40");
    CHECK(kv.at("theta_deg") == "30");
    CHECK(kv.at("out_dir") == "a b");
    CHECK_THROWS_AS(parse_config_text("t_max 40\n"), UsageError);
    CHECK_THROWS_AS(parse_config_text("= 40\n"), UsageError);
}

TEST_CASE("set_key") {
    RunConfig c;
    set_key(c, "theta_deg", "30");
    CHECK(c.theta_h_deg == 30);
    CHECK(c.theta_f_deg == 30);
    set_key(c, "mode", "uniform-fourier");
    CHECK(c.mode == WalkMode::UniformFourier);
    set_key(c, "format", "json");
    CHECK(c.format == OutputFormat::Json);
    set_key(c, "phi_grid", "0,30");
    CHECK(c.phi_grid.size() == 2);
    CHECK_THROWS_AS(set_key(c, "colour", "red"), UsageError);
    CHECK_THROWS_AS(set_key(c, "t_max", "12x"), UsageError);
    CHECK_THROWS_AS(set_key(c, "theta_h_deg", "inf"), UsageError);
    CHECK_THROWS_AS(set_key(c, "theta_h_deg", "nan"), UsageError);
    CHECK_THROWS_AS(set_key(c, "format", "xml"), UsageError);
    CHECK_THROWS_AS(set_key(c, "mode", "quantum"), UsageError);
    for (const auto& key : config_keys()) CHECK(describe(c).count(key == "theta_deg" ? "theta_h_deg" : key) == 1);
}

TEST_CASE("validation") {
    RunConfig c;
    c.subcommand = "spread";
    c.t_max = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c.t_max = 100;
    c.fit_lo = 200;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c.fit_lo.reset();
    c.t0 = 101;
    CHECK_THROWS_AS(c.validate(), UsageError);
    c.t0.reset();
    c.cadence = 0;
    CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("precedence: flags over file over defaults") {
    TempDir dir;
    const auto file = dir / "run.cfg";
    std::ofstream(file) << "t_max = 50\ntheta_deg = 10\ngamma_deg = 20\nformat = json\n";

    const auto from_file = config_from_args({"spread", "--config", file.string()});
    CHECK(from_file.subcommand == "spread");
    CHECK(from_file.t_max == 50);
    CHECK(from_file.theta_h_deg == 10);
    CHECK(from_file.theta_f_deg == 10);
    CHECK(from_file.gamma_deg == 20);
    CHECK(from_file.phi_deg == 90);
    CHECK(from_file.format == OutputFormat::Json);

    const auto flagged = config_from_args({"spread", "--config", file.string(), "--t-max", "70", "--theta-f", "5"});
    CHECK(flagged.t_max == 70);
    CHECK(flagged.theta_h_deg == 10);
    CHECK(flagged.theta_f_deg == 5);
    CHECK(flagged.gamma_deg == 20);

    const auto before_subcommand = config_from_args({"--t-max", "33", "carpet"});
    CHECK(before_subcommand.t_max == 33);
    CHECK(before_subcommand.subcommand == "carpet");

    const auto defaults = config_from_args({"entropy-map"});
    CHECK(defaults.t_max == RunConfig{}.t_max);
    CHECK(defaults.theta_h_deg == 45);

    std::ofstream(dir / "bad.cfg") << "t_max = 50\nspeed = 3\n";
    CHECK_THROWS_AS(config_from_args({"spread", "--config", (dir / "bad.cfg").string()}), UsageError);
    CHECK_THROWS_AS(config_from_args({"spread", "--config", (dir / "missing.cfg").string()}), UsageError);
}

TEST_CASE("exit codes") {
    TempDir dir;
    const auto out = dir.path().string();
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"spread", "--no-such-flag", "1"}) == 1);
    CHECK(run_cli({"spread", "--t-max", "0", "--out", out}) == 1);
    CHECK(run_cli({"spread", "--format", "xml", "--out", out}) == 1);
    CHECK(run_cli({"carpet", "--t-max", "2001", "--out", out}) == 1);
    CHECK(run_cli({"oracle-check", "--oracle-t-max", "6", "--out", out}) == 1);
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({"--version"}) == 0);
    CHECK(run_cli({"oracle-check", "--out", out}) == 0);
    CHECK(run_cli({"carpet", "--t-max", "1", "--out", out}) == 0);
}

TEST_CASE("oracle-check fails loudly on a perturbed engine") {
    TempDir dir;
    auto c = small("oracle-check", dir.path());
    c.theta_h_grid = {30};
    OracleHooks hooks;
    hooks.perturb = [](double, InterferenceField& field) {
        if (field.t == 4) field.values[static_cast<std::size_t>(-field.x_min)] += 1e-9;  // x = 0
    };
    const auto r = run_command(c, hooks);
    CHECK(r.exit_code == 2);
    CHECK(r.summary.at("status") == "fail");
    CHECK(r.summary.at("failures") == "1");

    const auto report = read_csv(r.files.at(0));
    const auto pass = report.column("pass");
    const auto x = report.column("x");
    const auto t = report.column("t");
    std::size_t failing = 0;
    for (const auto& row : report.rows) {
        if (row[pass] == "0") {
            ++failing;
            CHECK(row[t] == "4");
            CHECK(row[x] == "0");
        }
    }
    CHECK(failing == 1);

    const auto manifest = nlohmann::json::parse(slurp(r.manifest));
    CHECK(manifest["exit_code"] == 2);

    const auto clean = run_command(small("oracle-check", dir.path()));
    CHECK(clean.exit_code == 0);
    CHECK(clean.summary.at("comparisons") == std::to_string(2 * 36));
}

TEST_CASE("carpet export") {
    TempDir dir;
    auto c = small("carpet", dir.path());
    c.t_max = 100;
    const auto r = run_command(c);
    const auto p = read_csv(r.files.at(0));
    const auto bits = read_csv(r.files.at(1));
    REQUIRE(p.rows.size() == 101);
    CHECK(p.header.size() == 202);
    CHECK(p.header[1] == "-100");
    CHECK(p.header[201] == "100");
    for (const auto& row : p.rows) {
        double mx = 0.0;
        for (std::size_t j = 1; j < row.size(); ++j) mx = std::max(mx, std::stod(row[j]));
        CHECK(mx == 1.0);
    }
    REQUIRE(bits.rows.size() == 101);
    CHECK(bits.rows[2][99] == "1");   // x = -2
    CHECK(bits.rows[2][101] == "0");  // x = 0
    CHECK(bits.rows[2][103] == "1");  // x = 2

    c.t_max = 1;
    const auto tiny = read_csv(run_command(c).files.at(0));
    REQUIRE(tiny.rows.size() == 2);
    CHECK(tiny.rows[0][0] == "0");
    CHECK(tiny.rows[1][0] == "1");

    c.t_max = 100;
    c.carpet_cap = 99;
    CHECK_THROWS_AS(run_command(c), UsageError);
}

TEST_CASE("small uniform angles give broader wavepackets") {
    TempDir dir;
    auto spread_of = [&](double deg) {
        auto c = small("carpet", dir.path());
        c.mode = WalkMode::UniformHadamard;
        c.t_max = 100;
        c.theta_h_deg = deg;
        const auto p = read_csv(run_command(c).files.at(0));
        const auto& last = p.rows.back();
        double mass = 0.0;
        double m2 = 0.0;
        for (std::size_t j = 1; j < last.size(); ++j) {
            const double x = std::stod(p.header[j]);
            const double v = std::stod(last[j]);
            mass += v;
            m2 += x * x * v;
        }
        return m2 / mass;
    };
    CHECK(spread_of(15) > spread_of(75));
}

TEST_CASE("interference export") {
    TempDir dir;
    auto c = small("interference", dir.path());
    c.t_max = 40;
    c.theta_h_deg = 45;
    c.theta_f_deg = 0;
    c.phi_deg = 0;
    const auto r = run_command(c);
    const auto mu = read_csv(r.files.at(0));
    const auto vis = read_csv(r.files.at(1));
    REQUIRE(mu.rows.size() == 41);
    for (std::size_t j = 1; j < mu.rows[4].size(); ++j) CHECK(std::stod(mu.rows[4][j]) < 1e-15);
    CHECK(mu.rows[0][41] == "1");
    bool sentinel = false;
    for (const auto& row : vis.rows) {
        for (std::size_t j = 1; j < row.size(); ++j) {
            const double v = std::stod(row[j]);
            CHECK(!std::isnan(v));
            sentinel = sentinel || v == kUndefinedVisibility;
            CHECK((v == kUndefinedVisibility || (v >= 0.0 && v <= 1.0 + 1e-12)));
        }
    }
    CHECK(sentinel);

    SUBCASE("support tracks the probability carpet") {
        auto both = small("interference", dir.path() / "both");
        both.t_max = 100;
        const auto m = read_csv(run_command(both).files.at(0));
        both.subcommand = "carpet";
        const auto p = read_csv(run_command(both).files.at(0));
        std::size_t outside = 0;
        for (std::size_t t = 0; t < m.rows.size(); ++t) {
            for (std::size_t j = 1; j < m.rows[t].size(); ++j) {
                if (std::stod(m.rows[t][j]) > 0.0 && std::stod(p.rows[t][j]) == 0.0) ++outside;
            }
        }
        CHECK(outside == 0);
    }
}

TEST_CASE("spread, alpha-diagram, trace-distance and entropy-map outputs") {
    TempDir dir;
    SUBCASE("spread") {
        auto c = small("spread", dir.path());
        c.theta_h_deg = c.theta_f_deg = 90;
        const auto r = run_command(c);
        CHECK(r.summary.at("bounded") == "true");
        const auto fit = read_csv(r.files.at(1));
        CHECK(std::abs(std::stod(fit.rows[0][fit.column("exponent")])) < 0.1);
        const auto series = read_csv(r.files.at(0));
        CHECK(series.header == std::vector<std::string>{"t", "m2"});

        c.mode = WalkMode::UniformHadamard;
        c.theta_h_deg = 45;
        c.t_max = 4000;
        const auto uniform = run_command(c);
        CHECK(std::stod(uniform.summary.at("alpha")) == doctest::Approx(2.0).epsilon(0.01));
    }
    SUBCASE("alpha-diagram") {
        const auto r = run_command(small("alpha-diagram", dir.path()));
        const auto t = read_csv(r.files.at(0));
        REQUIRE(t.rows.size() == 3);
        CHECK(t.rows[0][0] == "15");
        CHECK(t.rows[2][t.column("bounded")] == "1");
    }
    SUBCASE("trace-distance with a frozen coin state") {
        auto c = small("trace-distance", dir.path());
        c.theta_h_deg = 0;
        c.theta_f_deg = 45;
        const auto r = run_command(c);
        CHECK(r.summary.count("beta_error") == 1);
        const auto series = read_csv(r.files.at(0));
        CHECK(series.rows.size() == 301);
        for (std::size_t i = 2; i < series.rows.size(); ++i) CHECK(std::stod(series.rows[i][1]) < 1e-12);
    }
    SUBCASE("trace-distance cadence thins the series but keeps t_max") {
        auto c = small("trace-distance", dir.path());
        c.cadence = 7;
        const auto series = read_csv(run_command(c).files.at(0));
        CHECK(series.rows.size() == 300 / 7 + 2);
        CHECK(series.rows.back()[0] == "300");
    }
    SUBCASE("entropy-map") {
        const auto r = run_command(small("entropy-map", dir.path()));
        const auto t = read_csv(r.files.at(0));
        REQUIRE(t.rows.size() == 2 * 2 * 1 * 2);
        CHECK(t.header == std::vector<std::string>{"theta_h_deg", "theta_f_deg", "gamma_deg", "phi_deg",
                                                   "mean_entropy", "error"});
    }
}

TEST_CASE("json mirrors csv") {
    TempDir dir;
    auto c = small("alpha-diagram", dir.path() / "csv");
    const auto csv = read_csv(run_command(c).files.at(0));
    c.out_dir = dir.path() / "json";
    c.format = OutputFormat::Json;
    const auto r = run_command(c);
    CHECK(r.files.at(0).extension() == ".json");
    const auto doc = nlohmann::json::parse(slurp(r.files.at(0)));
    CHECK(doc["columns"].get<std::vector<std::string>>() == csv.header);
    REQUIRE(doc["rows"].size() == csv.rows.size());
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        CHECK(doc["rows"][i]["theta_deg"].get<double>() == std::stod(csv.rows[i][0]));
        CHECK(doc["rows"][i]["alpha"].get<double>() == std::stod(csv.rows[i][1]));
    }

    auto m = small("carpet", dir.path() / "json");
    m.t_max = 5;
    m.format = OutputFormat::Json;
    const auto mat = nlohmann::json::parse(slurp(run_command(m).files.at(0)));
    CHECK(mat["x"].size() == 11);
    CHECK(mat["rows"].size() == 6);
    CHECK(mat["rows"][3]["t"] == 3);
    CHECK(mat["rows"][3]["values"].size() == 11);
}

TEST_CASE("manifest records config, version and wall time") {
    TempDir dir;
    const auto r = run_command(small("spread", dir.path()));
    CHECK(r.manifest.filename() == "spread.manifest.json");
    const auto doc = nlohmann::json::parse(slurp(r.manifest));
    CHECK(doc["version"] == std::string(code_version()));
    CHECK(doc["config"]["t_max"] == "300");
    CHECK(doc["config"]["fit_lo"] == "3");
    CHECK(doc["config"]["fit_hi"] == "300");
    CHECK(doc["wall_time_s"].get<double>() >= 0.0);
    CHECK(doc["files"].size() == 2);
}

TEST_CASE("data files are byte-identical across reruns and worker counts") {
    TempDir dir;
    for (const auto& sub : subcommands()) {
        CAPTURE(sub);
        std::vector<std::vector<std::string>> contents;
        int run = 0;
        for (unsigned workers : {1u, 1u, 3u}) {
            auto c = small(sub, dir.path() / (sub + std::to_string(run++)));
            c.workers = workers;
            if (sub == "carpet" || sub == "interference") c.t_max = 60;
            const auto r = run_command(c);
            std::vector<std::string> files;
            for (const auto& f : r.files) files.push_back(slurp(f));
            contents.push_back(files);
        }
        CHECK(contents[0] == contents[1]);
        CHECK(contents[0] == contents[2]);
    }
}
