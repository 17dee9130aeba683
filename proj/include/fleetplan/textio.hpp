#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fleetplan {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Strict full-string parses; throw std::invalid_argument naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

std::vector<std::string> split(std::string_view line, char separator);
std::string_view trim(std::string_view text);

/// Quote a CSV field when it contains separators, quotes, or newlines.
std::string csv_escape(std::string_view field);

/// Split one CSV line honoring double-quoted fields.
std::vector<std::string> csv_split(std::string_view line);

/// FNV-1a over the bytes, as a fixed-width hex string.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace fleetplan
