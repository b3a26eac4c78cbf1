#pragma once

#include <optional>
#include <string>

#include "grappa/gsl/ast.hpp"
#include "grappa/gsl/value.hpp"

namespace grappa::gsl {

// Parses a guidance script.  The first line must be the header `#gsl 1`
// (missing_header_error otherwise); malformed code raises syntax_error with a
// line:column location.  A missing `guidance` entry is not a parse error.
program parse(const std::string& source);

// Folds literal expressions (numbers, strings, booleans, unary minus, vector
// and map literals of constants).  Returns nullopt for anything computed.
std::optional<value> try_const_eval(const expr& e);

}  // namespace grappa::gsl
