#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "grappa/errors.hpp"
#include "grappa/types.hpp"

namespace grappa::gsl {

struct span {
  int line = 0;  // 1-based; 0 means "no location"
  int col = 0;
};

inline std::string to_string(const span& s) {
  return std::to_string(s.line) + ":" + std::to_string(s.col);
}

class missing_header_error : public error {
 public:
  explicit missing_header_error(const std::string& what)
      : error("missing header: " + what) {}
};

class syntax_error : public error {
 public:
  syntax_error(span where, const std::string& what)
      : error("syntax error at " + gsl::to_string(where) + ": " + what),
        where_(where) {}
  span where() const { return where_; }

 private:
  span where_;
};

enum class eval_fault {
  type,
  unknown_variable,
  unknown_function,
  arity,
  index,
  key,
  non_finite,
  call_depth,
  wrong_return_shape,
  hidden_type,
};

class eval_error : public error {
 public:
  eval_error(span where, eval_fault fault, const std::string& what)
      : error("runtime error at " + gsl::to_string(where) + ": " + what),
        where_(where),
        fault_(fault) {}
  span where() const { return where_; }
  eval_fault fault() const { return fault_; }

 private:
  span where_;
  eval_fault fault_;
};

class budget_exceeded_error : public error {
 public:
  explicit budget_exceeded_error(const std::string& what)
      : error("evaluation budget exceeded: " + what) {}
};

enum class binary_op { add, sub, mul, div, lt, le, gt, ge, eq, ne, logic_and, logic_or };
enum class unary_op { negate, logic_not };

struct expr;
using expr_ptr = std::unique_ptr<expr>;

struct number_lit { double value = 0.0; };
struct bool_lit { bool value = false; };
struct string_lit { std::string value; };
struct identifier { std::string name; };
struct vector_lit { std::vector<expr_ptr> items; };
struct map_lit { std::vector<std::pair<std::string, expr_ptr>> entries; };
struct unary_expr { unary_op op; expr_ptr operand; };
struct binary_expr { binary_op op; expr_ptr lhs; expr_ptr rhs; };
struct index_expr { expr_ptr object; expr_ptr index; };
struct slice_expr { expr_ptr object; expr_ptr lo; expr_ptr hi; };
struct call_expr { std::string callee; std::vector<expr_ptr> args; };

struct expr {
  span where;
  std::variant<number_lit, bool_lit, string_lit, identifier, vector_lit,
               map_lit, unary_expr, binary_expr, index_expr, slice_expr,
               call_expr>
      node;
};

struct stmt;
using stmt_ptr = std::unique_ptr<stmt>;

struct block { std::vector<stmt_ptr> stmts; };

struct let_stmt { std::string name; expr_ptr value; };
struct assign_stmt { expr_ptr target; expr_ptr value; };
struct if_stmt { expr_ptr cond; block then_body; std::optional<block> else_body; };
struct for_stmt { std::string var; expr_ptr iterable; block body; };
// `second` is non-null only for the two-element form `return (a, b);`
struct return_stmt { expr_ptr value; expr_ptr second; };
struct expr_stmt { expr_ptr value; };

struct stmt {
  span where;
  std::variant<let_stmt, assign_stmt, if_stmt, for_stmt, return_stmt, expr_stmt>
      node;
};

struct param {
  std::string name;
  expr_ptr default_value;  // may be null
};

struct fn_decl {
  std::string name;
  std::vector<param> params;
  block body;
  span where;
};

// A parsed guidance script.  Parsing succeeds without a `guidance` entry;
// validate_format reports that as an issue.
struct program {
  int version = 1;
  std::string source;
  std::vector<fn_decl> functions;
  int entry = -1;  // index into `functions`, -1 when absent
  hidden_state default_hidden;

  const fn_decl* find(const std::string& name) const;
  bool has_entry() const { return entry >= 0; }
};

inline const char* entry_name() { return "guidance"; }

}  // namespace grappa::gsl
