#include "curekit/lang/lexer.hpp"

#include <cctype>

namespace curekit::lang {

const std::vector<std::string>& keywords() {
  static const std::vector<std::string> kw = {"fn",    "let",    "if",   "else",
                                              "while", "return", "true", "false"};
  return kw;
}

namespace {
bool is_keyword(const std::string& w) {
  for (const auto& k : keywords())
    if (w == k) return true;
  return false;
}
}  // namespace

std::vector<Token> lex(const std::string& source) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (source[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < source.size()) {
    char c = source[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < source.size() && source[i + 1] == '/') {
      while (i < source.size() && source[i] != '\n') advance(1);
      continue;
    }
    int tl = line, tc = col;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      while (i < source.size() && std::isdigit(static_cast<unsigned char>(source[i]))) {
        digits += source[i];
        advance(1);
      }
      Token t{TokKind::Int, digits, 0, tl, tc};
      t.int_val = std::stoll(digits);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string w;
      while (i < source.size() &&
             (std::isalnum(static_cast<unsigned char>(source[i])) || source[i] == '_')) {
        w += source[i];
        advance(1);
      }
      out.push_back({is_keyword(w) ? TokKind::Keyword : TokKind::Ident, w, 0, tl, tc});
      continue;
    }
    if (c == '"') {
      advance(1);
      std::string body;
      bool closed = false;
      while (i < source.size()) {
        if (source[i] == '"') {
          advance(1);
          closed = true;
          break;
        }
        if (source[i] == '\\' && i + 1 < source.size()) {
          char e = source[i + 1];
          advance(2);
          switch (e) {
            case 'n': body += '\n'; break;
            case 't': body += '\t'; break;
            case '\\': body += '\\'; break;
            case '"': body += '"'; break;
            default: body += e; break;
          }
          continue;
        }
        if (source[i] == '\n') break;  // strings do not span lines
        body += source[i];
        advance(1);
      }
      if (!closed) throw SyntaxError(tl, tc, "unterminated string literal");
      out.push_back({TokKind::Str, body, 0, tl, tc});
      continue;
    }
    // two-character operators first
    if (i + 1 < source.size()) {
      std::string two = source.substr(i, 2);
      if (two == "==" || two == "!=" || two == "<=" || two == ">=" || two == "&&" || two == "||") {
        out.push_back({TokKind::Sym, two, 0, tl, tc});
        advance(2);
        continue;
      }
    }
    static const std::string singles = "=<>!+-*/%()[]{},;";
    if (singles.find(c) != std::string::npos) {
      out.push_back({TokKind::Sym, std::string(1, c), 0, tl, tc});
      advance(1);
      continue;
    }
    throw SyntaxError(tl, tc, std::string("unexpected character '") + c + "'");
  }
  out.push_back({TokKind::End, "", 0, line, col});
  return out;
}

}  // namespace curekit::lang
