#pragma once

#include <string>
#include <vector>

namespace mixstyle::cli {

// Entry point shared by the binary and the test suite. args excludes argv[0].
// Returns the process exit code; errors print one line to stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace mixstyle::cli
