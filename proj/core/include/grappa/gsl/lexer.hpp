#pragma once

#include <string>
#include <vector>

#include "grappa/gsl/ast.hpp"

namespace grappa::gsl {

enum class token_kind {
  number, string, ident,
  kw_fn, kw_let, kw_if, kw_else, kw_for, kw_in, kw_return,
  kw_and, kw_or, kw_not, kw_true, kw_false,
  lparen, rparen, lbrace, rbrace, lbracket, rbracket,
  comma, semicolon, colon, assign,
  eq, ne, lt, le, gt, ge,
  plus, minus, star, slash,
  end,
};

struct token {
  token_kind kind = token_kind::end;
  std::string text;
  double number = 0.0;
  span where;
};

// Tokenizes a whole script.  '#' starts a comment running to end of line.
// Throws syntax_error on malformed input.
std::vector<token> tokenize(const std::string& source);

}  // namespace grappa::gsl
