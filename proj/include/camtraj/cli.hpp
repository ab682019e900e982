#pragma once

namespace camtraj {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;

/// Entry point of the `camtraj` command line tool. Subcommands: plan,
/// time-opt, metrics, compare, baseline-lookat. Diagnostics go to stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace camtraj
