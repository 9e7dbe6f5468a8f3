#ifndef AEHCL_CONFIG_H_
#define AEHCL_CONFIG_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace aehcl {

// Flat `key = value` documents; `#` starts a comment, blank lines are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text, const std::string& source = "<config>");
KeyValues read_key_values(const std::string& path);

// Strict scalar parsers; throw ValidationError naming the key.
double parse_real(const std::string& key, const std::string& value);
std::int64_t parse_int(const std::string& key, const std::string& value);
std::uint64_t parse_uint(const std::string& key, const std::string& value);
std::vector<double> parse_real_list(const std::string& key, const std::string& value);

std::string format_real(double value);

}  // namespace aehcl

#endif  // AEHCL_CONFIG_H_
