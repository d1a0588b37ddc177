#include "curekit/lang/extract.hpp"

#include "curekit/lang/parser.hpp"
#include "curekit/tok/tokenizer.hpp"

namespace curekit::lang {

std::vector<MethodSpan> method_spans(const Program& p) {
  std::vector<MethodSpan> out;
  out.reserve(p.functions.size());
  for (const auto& f : p.functions) out.push_back({f.name, f.line, f.body.close_line});
  return out;
}

std::vector<std::string> extract_methods(const std::string& source, int max_tokens) {
  Program p = parse(source);
  std::vector<std::string> out;
  for (const auto& span : method_spans(p)) {
    std::string text;
    size_t tokens = 0;
    for (int ln = span.start_line; ln <= span.end_line; ++ln) {
      const std::string& line = p.src_lines.at(static_cast<size_t>(ln - 1));
      tokens += tok::word_tokenize(line).tokens.size();
      text += line;
      text += '\n';
    }
    if (tokens <= static_cast<size_t>(max_tokens)) out.push_back(std::move(text));
  }
  return out;
}

}  // namespace curekit::lang
