#pragma once

#include <iosfwd>

namespace nbtv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the nbtv tool. Subcommands: simulate, reconstruct,
/// experiment1, experiment2, metrics. Returns 0 on success, 1 on usage or
/// configuration errors, 2 when the run itself fails.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nbtv
