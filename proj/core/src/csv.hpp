#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace subjaudit::detail {

/// RFC 4180 rows: quoted fields may contain commas, doubled quotes and
/// newlines. CR characters outside quotes are dropped.
std::vector<std::vector<std::string>> parse_csv_rows(const std::string& content,
                                                     const std::filesystem::path& origin);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(std::string_view value);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace subjaudit::detail
