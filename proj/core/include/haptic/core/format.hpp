#pragma once

#include <string>
#include <string_view>

namespace haptic {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Strict decimal parse of the whole field; nullopt-style failure via bool.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

std::string_view trim(std::string_view s);

}  // namespace haptic
