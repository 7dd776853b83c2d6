// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hilo {

struct GradCheckResult {
  std::string kernel;
  std::int64_t instances = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Central-difference checks of every hand-written gradient on `instances`
/// random inputs per kernel, up to the composed two-branch loss.
std::vector<GradCheckResult> run_gradient_suite(std::int64_t instances, std::uint64_t seed,
                                                double tolerance = 1e-4, double step = 1e-5);

}  // namespace hilo
