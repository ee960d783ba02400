#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cfsim {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Lowercase, drop ASCII punctuation, collapse whitespace and trim. Two inputs
/// that normalize equal are treated as the same counterfactual.
std::string normalize_for_dedup(std::string_view s);

/// Collapse every whitespace run to one space and trim.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

std::string read_file(const std::string& path);

}  // namespace cfsim
