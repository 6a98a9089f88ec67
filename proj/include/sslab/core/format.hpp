#pragma once

#include <string>
#include <vector>

namespace sslab {

/// Shortest round-trip decimal form; "inf"/"-inf"/"nan" for non-finite values.
std::string fmt(double v);
std::string join(const std::vector<double>& values, char sep);
std::string join(const std::vector<std::string>& parts, char sep);
std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);
/// Accepts "inf", "+inf", "-inf" in addition to the usual forms. Throws on trailing junk.
double parse_double(const std::string& s);
long long parse_int(const std::string& s);
std::vector<double> parse_list(const std::string& s, char sep = ',');

}  // namespace sslab
