#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stgcn {

/// One "key = value" assignment; `line` is the 1-based source line.
struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// Parses line-oriented "key = value" text. '#' starts a comment, blank lines
/// are skipped. Throws std::invalid_argument (with the line number) on lines
/// that are not assignments.
std::vector<KeyValue> parse_key_values(std::string_view text);

/// Shortest decimal that round-trips the exact double value.
std::string format_double(double value);

std::string format_bool(bool value);

/// Strict parsers; throw std::invalid_argument naming the offending text.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);
bool parse_bool(std::string_view text);
std::vector<std::uint64_t> parse_uint_list(std::string_view text);  // comma separated

std::string join_uint_list(const std::vector<std::uint64_t>& values);

std::string trim(std::string_view text);

}  // namespace stgcn
