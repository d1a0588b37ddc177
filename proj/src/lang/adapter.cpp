#include "curekit/lang/adapter.hpp"

#include <cstdlib>

#include "curekit/util/config.hpp"

namespace curekit::lang {

namespace {
ExternalAdapter from_map(const std::map<std::string, std::string>& kv) {
  ExternalAdapter a;
  auto need = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError(std::string("adapter config: missing '") + key + "'");
    return it->second;
  };
  a.compile_cmd = need("compile_cmd");
  a.test_cmd = need("test_cmd");
  a.pass_exit_code = std::stoi(need("pass_exit_code"));
  return a;
}

int run_in(const std::string& dir, const std::string& cmd) {
  std::string full = "cd " + dir + " && " + cmd;
  int status = std::system(full.c_str());
  if (status < 0) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

ExternalAdapter ExternalAdapter::from_config_file(const std::string& path) {
  return from_map(load_config_file(path));
}

ExternalAdapter ExternalAdapter::from_config_text(const std::string& text) {
  return from_map(parse_config(text));
}

int ExternalAdapter::run_compile(const std::string& project_dir) const {
  return run_in(project_dir, compile_cmd);
}

int ExternalAdapter::run_test(const std::string& project_dir) const { return run_in(project_dir, test_cmd); }

}  // namespace curekit::lang
