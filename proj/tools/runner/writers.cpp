#include "writers.hpp"

#include "fractalqw/errors.hpp"

#include "json.hpp"

#include <fstream>

#ifndef FRACTALQW_VERSION
#define FRACTALQW_VERSION "unknown"
#endif

namespace fqw::cli {

namespace {

using nlohmann::ordered_json;

std::string cell_text(const Cell& cell) {
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
    const auto& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    return quoted + "\"";
}

ordered_json cell_json(const Cell& cell) {
    return std::visit([](const auto& v) { return ordered_json(v); }, cell);
}

std::filesystem::path write_text(const std::filesystem::path& dir, std::string_view stem, OutputFormat format,
                                 const std::string& text) {
    std::filesystem::create_directories(dir);
    auto path = dir / (std::string(stem) + (format == OutputFormat::Csv ? ".csv" : ".json"));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw UsageError("cannot write " + path.string());
    return path;
}

}  // namespace

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw UsageError("Table::add: row width does not match the header");
    rows.push_back(std::move(row));
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out += ',';
        out += table.columns[j];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += cell_text(row[j]);
        }
        out += '\n';
    }
    return out;
}

std::string to_json(const Table& table) {
    ordered_json doc;
    doc["columns"] = table.columns;
    doc["rows"] = ordered_json::array();
    for (const auto& row : table.rows) {
        ordered_json record = ordered_json::object();
        for (std::size_t j = 0; j < row.size(); ++j) record[table.columns[j]] = cell_json(row[j]);
        doc["rows"].push_back(std::move(record));
    }
    return doc.dump(1) + "\n";
}

std::string to_csv(const Matrix& m) {
    std::string out = "t";
    for (std::int64_t j = 0; j < m.width; ++j) out += ',' + std::to_string(m.x_min + j);
    out += '\n';
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        out += std::to_string(m.t[r]);
        for (double v : m.rows[r]) out += ',' + format_number(v);
        out += '\n';
    }
    return out;
}

std::string to_json(const Matrix& m) {
    ordered_json doc;
    std::vector<std::int64_t> x(static_cast<std::size_t>(m.width));
    for (std::int64_t j = 0; j < m.width; ++j) x[static_cast<std::size_t>(j)] = m.x_min + j;
    doc["x"] = x;
    doc["rows"] = ordered_json::array();
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        doc["rows"].push_back(ordered_json{{"t", m.t[r]}, {"values", m.rows[r]}});
    }
    return doc.dump() + "\n";
}

std::filesystem::path write_table(const std::filesystem::path& dir, std::string_view stem, const Table& table,
                                  OutputFormat format) {
    return write_text(dir, stem, format, format == OutputFormat::Csv ? to_csv(table) : to_json(table));
}

std::filesystem::path write_matrix(const std::filesystem::path& dir, std::string_view stem, const Matrix& matrix,
                                   OutputFormat format) {
    return write_text(dir, stem, format, format == OutputFormat::Csv ? to_csv(matrix) : to_json(matrix));
}

std::string_view code_version() noexcept { return FRACTALQW_VERSION; }

std::filesystem::path write_manifest(const Manifest& manifest) {
    ordered_json doc;
    doc["tool"] = "fqw";
    doc["version"] = code_version();
    doc["subcommand"] = manifest.config.subcommand;
    doc["config"] = describe(manifest.config);
    doc["files"] = ordered_json::array();
    for (const auto& f : manifest.files) doc["files"].push_back(f.filename().string());
    doc["summary"] = manifest.summary;
    doc["exit_code"] = manifest.exit_code;
    doc["wall_time_s"] = manifest.wall_time_s;

    const auto& dir = manifest.config.out_dir;
    std::filesystem::create_directories(dir);
    auto path = dir / (manifest.config.subcommand + ".manifest.json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw UsageError("cannot write " + path.string());
    return path;
}

}  // namespace fqw::cli
