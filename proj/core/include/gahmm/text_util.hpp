#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers and writers.
namespace gahmm::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_ws(std::string_view s);
std::vector<std::string_view> lines(std::string_view s);

// printf %.17g; reading the text back with parse_double yields the same double.
std::string format_double(double v);

// Whole-string numeric parses; nullopt on trailing garbage or overflow.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::string to_lower(std::string_view s);

}  // namespace gahmm::text
