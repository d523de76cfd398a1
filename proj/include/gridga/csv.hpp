#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gridga::csv {

/// RFC-4180 records: comma separated, double-quote quoting with "" escapes,
/// LF or CRLF line ends. A trailing empty line is not a record. Throws
/// Error(schema) on an unterminated quote.
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Parses one cell as a real. Leading/trailing blanks are ignored; "inf",
/// "-inf", "nan" (any case) give non-finite values; empty or non-numeric
/// text gives the missing sentinel.
double parse_real(std::string_view cell) noexcept;

/// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

std::string read_file(const std::filesystem::path& path);

}  // namespace gridga::csv
