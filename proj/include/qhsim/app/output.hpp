#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace qhsim::app {

using Cell = std::variant<double, std::string>;

/// Column-ordered result table shared by the CSV and JSON writers.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// 17 significant digits, "nan"/"inf"/"-inf" for non-finite values.
std::string format_number(double value);

/// Header plus one line per row, "," delimiter, LF endings. String cells
/// are written verbatim and must not contain delimiters.
std::string table_to_csv(const Table& table);

/// {"metadata": ..., "columns": [...], "rows": [[...], ...]}; non-finite
/// numbers become null.
std::string table_to_json(const Table& table, const nlohmann::ordered_json& metadata);

/// 64-bit FNV-1a digest as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace qhsim::app
