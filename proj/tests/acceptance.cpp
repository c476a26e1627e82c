// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Usage: acceptance [comma-separated ids]

#include <cstdio>

#include "touchsdf/touchsdf.h"

namespace {

void report(const char* id, const char* title, int passed, double seconds, const char* detail, void*) {
  std::printf("%s %-10s %-48s (%.2fs) %s\n", passed ? "PASS" : "FAIL", id, title, seconds, detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  int failed = 0;
  const tsdf_status s = tsdf_selftest(argc > 1 ? argv[1] : nullptr, report, nullptr, &failed);
  if (s != TSDF_OK) {
    std::printf("ERROR %s: %s\n", tsdf_status_name(s), tsdf_last_error());
    return 2;
  }
  std::printf("%s\n", failed == 0 ? "acceptance: all criteria passed" : "acceptance: FAILED");
  return failed == 0 ? 0 : 1;
}
