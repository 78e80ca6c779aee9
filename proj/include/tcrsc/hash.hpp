#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tcrsc {

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// 16-char lowercase hex.
std::string hex64(std::uint64_t v);

// FNV-1a over the whole file contents.
std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace tcrsc
