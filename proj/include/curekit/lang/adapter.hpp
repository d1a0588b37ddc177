#pragma once

#include <string>

#include "curekit/util/errors.hpp"

namespace curekit::lang {

// Hook for swapping MiniLang out for a real-language backend: a configured
// compile command and test command run against a project directory, with an
// exit-code contract. Loaded from a `key = value` file with entries
// compile_cmd, test_cmd, pass_exit_code.
struct ExternalAdapter {
  std::string compile_cmd;
  std::string test_cmd;
  int pass_exit_code = 0;

  static ExternalAdapter from_config_file(const std::string& path);
  static ExternalAdapter from_config_text(const std::string& text);

  // Run the command with CWD set by prefixing `cd dir &&`. Returns the
  // command's exit status (-1 if it could not run).
  int run_compile(const std::string& project_dir) const;
  bool compiles(const std::string& project_dir) const { return run_compile(project_dir) == 0; }
  int run_test(const std::string& project_dir) const;
  bool tests_pass(const std::string& project_dir) const { return run_test(project_dir) == pass_exit_code; }
};

}  // namespace curekit::lang
