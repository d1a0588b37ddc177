#include "curekit/tok/tokenizer.hpp"

#include <cctype>

namespace curekit::tok {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)); }

// Splits one identifier-ish run ([A-Za-z0-9_]+) into parts: underscores as
// `_` tokens, camel boundaries as CaMeL markers between parts.
void split_identifier(const std::string& w, std::vector<std::string>& out) {
  size_t i = 0;
  bool prev_was_part = false;  // last emitted token was a camel part
  while (i < w.size()) {
    if (w[i] == '_') {
      out.push_back("_");
      prev_was_part = false;
      ++i;
      continue;
    }
    // scan one camel part: stop at '_' or a camel boundary
    size_t j = i + 1;
    while (j < w.size() && w[j] != '_') {
      bool boundary =
          (is_upper(w[j]) && !is_upper(w[j - 1])) ||
          (is_upper(w[j]) && is_upper(w[j - 1]) && j + 1 < w.size() && w[j + 1] != '_' && !is_upper(w[j + 1]) &&
           std::isalpha(static_cast<unsigned char>(w[j + 1])));
      if (boundary) break;
      ++j;
    }
    if (prev_was_part) out.push_back(kCamel);
    out.push_back(w.substr(i, j - i));
    prev_was_part = true;
    i = j;
  }
}

bool is_two_char_op(const std::string& line, size_t i) {
  if (i + 1 >= line.size()) return false;
  char a = line[i], b = line[i + 1];
  return (a == '=' && b == '=') || (a == '!' && b == '=') || (a == '<' && b == '=') || (a == '>' && b == '=') ||
         (a == '&' && b == '&') || (a == '|' && b == '|') || (a == '-' && b == '>');
}

}  // namespace

TokenSeq word_tokenize(const std::string& line) {
  TokenSeq out;
  size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') break;  // comment to end of line
    if (c == '"') {
      size_t j = i + 1;
      while (j < line.size() && line[j] != '"') {
        if (line[j] == '\\' && j + 1 < line.size()) ++j;  // skip escaped char
        ++j;
      }
      size_t end = (j < line.size()) ? j + 1 : j;  // unterminated: take rest
      out.tokens.push_back(kStr);
      out.donors.push_back(line.substr(i, end - i));
      i = end;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      std::string num = line.substr(i, j - i);
      if (num == "0" || num == "1") {
        out.tokens.push_back(num);
      } else {
        out.tokens.push_back(kNum);
        out.donors.push_back(num);
      }
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < line.size() && is_word_char(line[j])) ++j;
      split_identifier(line.substr(i, j - i), out.tokens);
      i = j;
      continue;
    }
    if (is_two_char_op(line, i)) {
      out.tokens.push_back(line.substr(i, 2));
      i += 2;
      continue;
    }
    out.tokens.push_back(std::string(1, c));
    ++i;
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens, const std::vector<std::string>& donors) {
  // Phase 1: substitute placeholders with donor literals, in order.
  std::vector<std::string> subst;
  subst.reserve(tokens.size());
  size_t di = 0;
  for (const auto& t : tokens) {
    if (is_placeholder(t)) {
      if (di >= donors.size())
        throw MissingDonor("placeholder #" + std::to_string(di + 1) + " (" + t + ") has no donor literal");
      subst.push_back(donors[di++]);
    } else {
      subst.push_back(t);
    }
  }
  // Phase 2: rejoin identifiers. CaMeL glues neighbors; `_` glues to an
  // identifier-ish left neighbor and always glues the next word part.
  std::vector<std::string> pieces;
  bool glue_next = false;
  auto ident_tail = [](const std::string& s) {
    return !s.empty() && (std::isalnum(static_cast<unsigned char>(s.back())) || s.back() == '_');
  };
  auto ident_head = [](const std::string& s) {
    return !s.empty() && (std::isalnum(static_cast<unsigned char>(s.front())) || s.front() == '_');
  };
  for (const auto& t : subst) {
    if (t == kCamel) {
      glue_next = true;
      continue;
    }
    if (t == "_") {
      if (!pieces.empty() && ident_tail(pieces.back()))
        pieces.back() += "_";
      else
        pieces.push_back("_");
      glue_next = true;
      continue;
    }
    if (glue_next && !pieces.empty() && ident_head(t) && ident_tail(pieces.back()))
      pieces.back() += t;
    else
      pieces.push_back(t);
    glue_next = false;
  }
  std::string out;
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (i) out += ' ';
    out += pieces[i];
  }
  return out;
}

}  // namespace curekit::tok
