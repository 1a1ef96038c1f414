#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lcc {

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// Strict parse of a whole field (surrounding blanks allowed).
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Accepts a plain number (radians) or a number with a "deg" suffix.
std::optional<double> parse_angle(std::string_view text);

std::vector<std::string_view> split_fields(std::string_view line, char sep);
std::string_view trim(std::string_view text);

}  // namespace lcc
