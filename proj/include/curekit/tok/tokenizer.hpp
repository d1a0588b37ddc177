#pragma once

#include <string>
#include <vector>

#include "curekit/util/errors.hpp"

namespace curekit::tok {

// Marker tokens emitted by word-level tokenization. CaMeL records a
// camel-case boundary between identifier parts; <NUM>/<STR> abstract
// literals whose concrete text is carried in the donor list.
inline const std::string kCamel = "CaMeL";
inline const std::string kNum = "<NUM>";
inline const std::string kStr = "<STR>";

inline bool is_marker(const std::string& t) { return t == kCamel || t == kNum || t == kStr; }
inline bool is_placeholder(const std::string& t) { return t == kNum || t == kStr; }

// Token sequence plus the literal texts behind <NUM>/<STR> placeholders,
// in order of appearance. Subword encoding leaves donors untouched.
struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<std::string> donors;

  bool operator==(const TokenSeq& o) const = default;
};

struct MissingDonor : DataError {
  explicit MissingDonor(const std::string& msg) : DataError(msg) {}
};

// Splits a source line into word-level tokens: whitespace and punctuation
// separate tokens, underscores become `_` tokens, camel-case boundaries
// insert the CaMeL marker with original casing preserved, numeric literals
// other than 0 and 1 become <NUM>, string literals become <STR>. Line
// comments (//...) produce no tokens. Total function.
TokenSeq word_tokenize(const std::string& line);

// Rebuilds a source line from word-level tokens: camel parts rejoined
// (markers removed), `_` runs glued into identifiers, placeholders replaced
// by donors in order, tokens joined with single spaces. The result re-lexes
// to the same token sequence. Throws MissingDonor when placeholders
// outnumber donors.
std::string detokenize(const std::vector<std::string>& tokens, const std::vector<std::string>& donors);

inline std::string detokenize(const TokenSeq& seq) { return detokenize(seq.tokens, seq.donors); }

}  // namespace curekit::tok
