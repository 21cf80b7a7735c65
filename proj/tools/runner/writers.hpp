#pragma once

#include "run_config.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fqw::cli {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

/// Row per time step; column j is site x_min + j.
struct Matrix {
    std::int64_t x_min = 0;
    std::int64_t width = 0;
    std::vector<std::int64_t> t;
    std::vector<std::vector<double>> rows;
};

std::string to_csv(const Table& table);
std::string to_json(const Table& table);
std::string to_csv(const Matrix& matrix);
std::string to_json(const Matrix& matrix);

/// Writes `<dir>/<stem>.csv` or `.json` and returns the path.
std::filesystem::path write_table(const std::filesystem::path& dir, std::string_view stem, const Table& table,
                                  OutputFormat format);
std::filesystem::path write_matrix(const std::filesystem::path& dir, std::string_view stem, const Matrix& matrix,
                                   OutputFormat format);

struct Manifest {
    RunConfig config;
    std::vector<std::filesystem::path> files;
    double wall_time_s = 0.0;
    int exit_code = 0;
    std::map<std::string, std::string> summary;
};

/// `<out_dir>/<subcommand>.manifest.json`.
std::filesystem::path write_manifest(const Manifest& manifest);

std::string_view code_version() noexcept;

}  // namespace fqw::cli
