#pragma once

#include <regex>
#include <string>

namespace profci {

// Translates a shell-style path glob to a regex over '/'-separated
// relative paths. Supported: '*' (within one segment), '?', '[...]',
// '**' (any number of segments). Throws pattern_invalid on bad syntax.
std::regex glob_to_regex(const std::string& glob);

bool glob_match(const std::regex& pattern, const std::string& relative_path);

} // namespace profci
