#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace homs {

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Strict parse of a whole token; throws InvalidArgument on trailing garbage.
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

/// Create parent directories of `path` if needed; throws IoError on failure.
void ensure_parent_dir(const std::string& path);

}  // namespace homs
