#pragma once

#include <string>
#include <vector>

#include "curekit/lang/ast.hpp"

namespace curekit::lang {

struct MethodSpan {
  std::string name;
  int start_line;  // line of 'fn', 1-based
  int end_line;    // line of the closing '}'
};

std::vector<MethodSpan> method_spans(const Program& p);

// One entry per function whose word-level token count is at most
// max_tokens, in source order; each entry is the function's exact source
// text slice. Propagates SyntaxError from parsing.
std::vector<std::string> extract_methods(const std::string& source, int max_tokens);

}  // namespace curekit::lang
