// Copyright 2026 The hilo-sg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hilo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Results go to files
/// or `out`; diagnostics go to `err` and the log.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hilo::cli
