#pragma once

namespace gpmpc::cli {

/// Full command-line entry point (subcommands simulate / compare / sweep /
/// forecast). Returns 0 on success, 1 on configuration or usage errors,
/// 2 on runtime failures. Split out of main() so tests can drive it.
int cli_main(int argc, const char* const* argv);

}  // namespace gpmpc::cli
