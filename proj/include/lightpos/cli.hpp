#pragma once

#include <cstdint>
#include <iosfwd>

namespace lightpos {

/// Seed used when neither --seed nor the scenario's noise.seed is given.
inline constexpr std::uint64_t kDefaultSeed = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitSolverFailure = 2;

/// Runs one subcommand. Results go to `out` (or the --out file), diagnostics
/// to `err`.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lightpos
