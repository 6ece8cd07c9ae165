#include "lgm/io.hpp"

#include <charconv>
#include <cstdio>

#ifndef LGM_VERSION
#define LGM_VERSION "0.0.0"
#endif

namespace lgm {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string provenance_line(std::string_view config_hash, std::uint64_t seed) {
  return std::string("# lgm ") + LGM_VERSION + " config=" + std::string(config_hash.empty() ? "none" : config_hash) +
         " seed=" + std::to_string(seed);
}

const char* version() { return LGM_VERSION; }

}  // namespace lgm
