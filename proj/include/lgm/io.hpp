#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace lgm {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

/// "# lgm <version> config=<hash> seed=<seed>"
std::string provenance_line(std::string_view config_hash, std::uint64_t seed);

const char* version();

}  // namespace lgm
