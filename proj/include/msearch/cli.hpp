#pragma once

#include <ostream>
#include <span>
#include <string>

namespace msearch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFailed = 1;
inline constexpr int kExitInputError = 2;

/// Entry point of the `msearch` tool; `args` excludes the program name.
///
///   msearch solve     <scenario> [--beta B] [--gamma G] [--tol T]
///   msearch dominate  <scenario> [--class C] [--tol T]
///   msearch verify    <scenario> [--theorem T2a|T2b|T2c|T3|T4] [--seed S] [--cases N] [--jobs J]
///   msearch closure   [scenario] [--class C] [--operator truncate|affine|clamp] [--samples N] [--seed S]
///   msearch simulate  <scenario> [--threshold X] [--episodes N] [--seed S]
///   msearch scaffold  <command>
///
/// Every command prints a table on `out`; --out FILE additionally writes the
/// report in --format (jsonl by default, or csv/table). Exit codes: 0 success,
/// 1 a verdict failed (no dominance, conclusion violated, closure broken,
/// expectation mismatch), 2 invalid input.
int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace msearch::cli
