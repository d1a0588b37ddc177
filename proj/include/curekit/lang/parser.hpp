#pragma once

#include <string>

#include "curekit/lang/ast.hpp"
#include "curekit/util/errors.hpp"

namespace curekit::lang {

// Parses MiniLang source. Throws SyntaxError(line, col, message) on
// malformed input; positions are 1-based.
Program parse(const std::string& source);

// Canonical source form. pretty_print(parse(s)) re-parses to a tree that is
// structurally identical to parse(s) (ast_signature equality).
std::string pretty_print(const Program& p);

// Structural fingerprint of the tree: node kinds, names, operators, and
// literals, with source positions deliberately excluded. Equal signatures
// mean equal trees.
std::string ast_signature(const Program& p);

}  // namespace curekit::lang
