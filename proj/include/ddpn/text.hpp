#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ddpn {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Strict parsers: the whole field must be consumed. Throw IoError otherwise.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace ddpn
