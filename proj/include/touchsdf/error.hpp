// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace touchsdf {

// Mirrors tsdf_status in touchsdf.h; keep the numeric values in sync.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDomainViolation = 2,
  kNotWatertight = 3,
  kEmptySurface = 4,
  kResolutionMismatch = 5,
  kIo = 6,
  kFormat = 7,
  kNumeric = 8,
  kGeneration = 9,
  kInternal = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace touchsdf
