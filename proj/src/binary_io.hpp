#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string_view>

#include "fracvort/errors.hpp"

namespace fracvort::detail {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw FormatError("unexpected end of binary stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

inline void put_magic(std::ostream& out, std::string_view magic) { out.write(magic.data(), 4); }

inline void expect_magic(std::istream& in, std::string_view magic) {
  char buf[4];
  if (!in.read(buf, 4) || std::string_view(buf, 4) != magic)
    throw FormatError("bad magic, expected " + std::string(magic));
}

}  // namespace fracvort::detail
