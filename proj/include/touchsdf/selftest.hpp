// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

namespace touchsdf {

struct CheckResult {
  std::string id;     // "AC1".."AC10" or a named extra check
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SelftestOptions {
  std::vector<std::string> only;  // ids to run; empty runs everything
  std::function<void(const CheckResult&)> on_result;
};

std::vector<std::string> selftest_ids();

/// Runs the property and oracle suite. AC10 runs last and, when the whole
/// suite was selected, also enforces the total wall-clock budget.
std::vector<CheckResult> run_selftest(const SelftestOptions& options = {});

inline constexpr double kSelftestBudgetSeconds = 300.0;

}  // namespace touchsdf
