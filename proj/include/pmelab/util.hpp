#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pmelab {

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <class T>
std::uint64_t fnv1a_bytes(const T* data, std::size_t n, std::uint64_t h = 14695981039346656037ull) {
  return fnv1a(std::string_view(reinterpret_cast<const char*>(data), n * sizeof(T)), h);
}

std::string hex64(std::uint64_t v);
/// Shortest round-tripping representation is not required; 17 significant digits is.
std::string fmt_g17(double v);

}  // namespace pmelab
