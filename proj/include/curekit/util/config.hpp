#pragma once

#include <map>
#include <string>

#include "curekit/util/errors.hpp"

namespace curekit {

// `key = value` configuration text: one pair per line, '#' starts a
// comment, blank lines ignored, whitespace around keys and values trimmed.
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::string& path);

}  // namespace curekit
