// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <istream>
#include <ostream>
#include <type_traits>

#include "touchsdf/error.hpp"

// Little-endian scalar IO shared by the binary formats.
namespace touchsdf::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

inline void read_exact(std::istream& is, char* dst, std::size_t n, const std::filesystem::path& path) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) fail(ErrorCode::kFormat, path.string() + ": truncated file");
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  char buf[sizeof(T)];
  read_exact(is, buf, sizeof(T), path);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace touchsdf::io
