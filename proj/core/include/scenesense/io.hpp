#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace scenesense {

std::string read_text_file(const std::filesystem::path& path);

/// Parses a JSON file; parse failures report line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// One JSON value per non-blank line.
std::vector<nlohmann::json> read_jsonl_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so a
/// failed run never leaves a truncated artifact behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_jsonl_file(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

/// Minimal RFC 4180 helpers: fields containing commas, quotes, or newlines
/// are quoted.
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Rounds half away from zero to `decimals` places and prints without
/// exponent notation. Values that round to zero print unsigned.
std::string format_fixed(double value, int decimals);

}  // namespace scenesense
