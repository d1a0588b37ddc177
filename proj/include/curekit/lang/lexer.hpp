#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curekit/util/errors.hpp"

namespace curekit::lang {

enum class TokKind { Ident, Keyword, Int, Str, Sym, End };

struct Token {
  TokKind kind;
  std::string text;   // identifier/keyword name, digits, string body, or symbol
  int64_t int_val = 0;
  int line = 1, col = 1;  // 1-based position of the first character
};

// Lexes MiniLang text. Line comments (//...) are skipped. Throws
// SyntaxError on an unterminated string or an unexpected character. The
// final token is always TokKind::End.
std::vector<Token> lex(const std::string& source);

// Reserved words of the language, in a fixed order.
const std::vector<std::string>& keywords();

}  // namespace curekit::lang
