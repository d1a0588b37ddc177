#pragma once

namespace curekit::cli {

// Parses argv, dispatches to a subcommand, maps exceptions to exit codes:
// 0 success, 1 usage error, 2 data error, 3 internal error.
int run(int argc, char** argv);

}  // namespace curekit::cli
