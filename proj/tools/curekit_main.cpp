// Entry point for the curekit command-line driver. Subcommand registration
// lives in src/cli; this file only owns main().

#include "curekit/cli/driver.hpp"

int main(int argc, char** argv) { return curekit::cli::run(argc, argv); }
