#include "grappa/gsl/parser.hpp"

#include <cctype>

#include "grappa/gsl/lexer.hpp"

namespace grappa::gsl {

namespace {

void check_header(const std::string& source) {
  std::string first = source.substr(0, source.find('\n'));
  std::size_t i = 0;
  while (i < first.size() && std::isspace(static_cast<unsigned char>(first[i]))) ++i;
  if (first.compare(i, 4, "#gsl") != 0) {
    throw missing_header_error("first line must be '#gsl 1'");
  }
  i += 4;
  while (i < first.size() && std::isspace(static_cast<unsigned char>(first[i]))) ++i;
  std::size_t digits = i;
  while (digits < first.size() &&
         std::isdigit(static_cast<unsigned char>(first[digits]))) {
    ++digits;
  }
  if (digits == i) throw missing_header_error("header has no version number");
  int version = std::stoi(first.substr(i, digits - i));
  if (version != 1) {
    throw missing_header_error("unsupported version " + std::to_string(version));
  }
  for (std::size_t j = digits; j < first.size(); ++j) {
    if (!std::isspace(static_cast<unsigned char>(first[j]))) {
      throw missing_header_error("trailing content after version number");
    }
  }
}

class parser {
 public:
  explicit parser(std::vector<token> tokens) : tokens_(std::move(tokens)) {}

  program run(const std::string& source) {
    program prog;
    prog.source = source;
    while (!check(token_kind::end)) {
      prog.functions.push_back(parse_fn());
    }
    for (std::size_t i = 0; i < prog.functions.size(); ++i) {
      if (prog.functions[i].name == entry_name()) {
        prog.entry = static_cast<int>(i);
        break;
      }
    }
    if (prog.has_entry()) {
      const fn_decl& entry = prog.functions[prog.entry];
      if (entry.params.size() == 2 && entry.params[1].default_value) {
        auto folded = try_const_eval(*entry.params[1].default_value);
        if (folded.has_value() && folded->is_map()) {
          hidden_state defaults;
          bool usable = true;
          for (const auto& [key, v] : folded->as_map().entries) {
            if (!valid_hidden_key(key)) usable = false;
            if (v.is_bool()) {
              defaults[key] = v.as_bool();
            } else if (v.is_number()) {
              defaults[key] = v.as_number();
            } else {
              usable = false;
            }
            if (!usable) break;
          }
          if (usable) prog.default_hidden = std::move(defaults);
        }
      }
    }
    return prog;
  }

 private:
  const token& peek() const { return tokens_[pos_]; }
  const token& previous() const { return tokens_[pos_ - 1]; }
  bool check(token_kind k) const { return peek().kind == k; }

  const token& advance() {
    if (!check(token_kind::end)) ++pos_;
    return previous();
  }

  bool match(token_kind k) {
    if (!check(k)) return false;
    advance();
    return true;
  }

  const token& expect(token_kind k, const std::string& what) {
    if (!check(k)) {
      throw syntax_error(peek().where,
                         "expected " + what + ", found '" + describe(peek()) + "'");
    }
    return advance();
  }

  static std::string describe(const token& t) {
    if (t.kind == token_kind::end) return "end of input";
    return t.text.empty() ? "?" : t.text;
  }

  fn_decl parse_fn() {
    span where = peek().where;
    expect(token_kind::kw_fn, "'fn'");
    fn_decl fn;
    fn.where = where;
    fn.name = expect(token_kind::ident, "function name").text;
    expect(token_kind::lparen, "'('");
    if (!check(token_kind::rparen)) {
      do {
        param p;
        p.name = expect(token_kind::ident, "parameter name").text;
        if (match(token_kind::assign)) {
          p.default_value = std::make_unique<expr>(parse_expr());
        }
        fn.params.push_back(std::move(p));
      } while (match(token_kind::comma));
    }
    expect(token_kind::rparen, "')'");
    fn.body = parse_block();
    return fn;
  }

  block parse_block() {
    expect(token_kind::lbrace, "'{'");
    block b;
    while (!check(token_kind::rbrace)) {
      if (check(token_kind::end)) {
        throw syntax_error(peek().where, "unterminated block");
      }
      b.stmts.push_back(std::make_unique<stmt>(parse_stmt()));
    }
    expect(token_kind::rbrace, "'}'");
    return b;
  }

  stmt parse_stmt() {
    span where = peek().where;
    if (match(token_kind::kw_let)) {
      let_stmt s;
      s.name = expect(token_kind::ident, "name after 'let'").text;
      expect(token_kind::assign, "'='");
      s.value = std::make_unique<expr>(parse_expr());
      expect(token_kind::semicolon, "';'");
      return stmt{where, std::move(s)};
    }
    if (match(token_kind::kw_if)) return parse_if(where);
    if (match(token_kind::kw_for)) {
      for_stmt s;
      s.var = expect(token_kind::ident, "loop variable").text;
      expect(token_kind::kw_in, "'in'");
      s.iterable = std::make_unique<expr>(parse_expr());
      s.body = parse_block();
      return stmt{where, std::move(s)};
    }
    if (match(token_kind::kw_return)) return parse_return(where);

    expr target = parse_expr();
    if (match(token_kind::assign)) {
      require_assignable(target);
      assign_stmt s;
      s.target = std::make_unique<expr>(std::move(target));
      s.value = std::make_unique<expr>(parse_expr());
      expect(token_kind::semicolon, "';'");
      return stmt{where, std::move(s)};
    }
    expect(token_kind::semicolon, "';'");
    expr_stmt s;
    s.value = std::make_unique<expr>(std::move(target));
    return stmt{where, std::move(s)};
  }

  stmt parse_if(span where) {
    if_stmt s;
    s.cond = std::make_unique<expr>(parse_expr());
    s.then_body = parse_block();
    if (match(token_kind::kw_else)) {
      if (check(token_kind::kw_if)) {
        span nested = peek().where;
        advance();
        block b;
        b.stmts.push_back(std::make_unique<stmt>(parse_if(nested)));
        s.else_body = std::move(b);
      } else {
        s.else_body = parse_block();
      }
    }
    return stmt{where, std::move(s)};
  }

  stmt parse_return(span where) {
    // Try the two-element form first; fall back to a single expression.
    if (check(token_kind::lparen)) {
      std::size_t mark = pos_;
      try {
        advance();  // '('
        expr first = parse_expr();
        if (match(token_kind::comma)) {
          expr second = parse_expr();
          expect(token_kind::rparen, "')'");
          expect(token_kind::semicolon, "';'");
          return_stmt s;
          s.value = std::make_unique<expr>(std::move(first));
          s.second = std::make_unique<expr>(std::move(second));
          return stmt{where, std::move(s)};
        }
      } catch (const syntax_error&) {
        // fall back below
      }
      pos_ = mark;
    }
    return_stmt s;
    s.value = std::make_unique<expr>(parse_expr());
    expect(token_kind::semicolon, "';'");
    return stmt{where, std::move(s)};
  }

  void require_assignable(const expr& e) {
    if (std::holds_alternative<identifier>(e.node)) return;
    if (const auto* idx = std::get_if<index_expr>(&e.node)) {
      require_assignable(*idx->object);
      return;
    }
    throw syntax_error(e.where, "cannot assign to this expression");
  }

  expr parse_expr() { return parse_or(); }

  expr parse_or() {
    expr lhs = parse_and();
    while (check(token_kind::kw_or)) {
      span where = advance().where;
      expr rhs = parse_and();
      lhs = make_binary(binary_op::logic_or, std::move(lhs), std::move(rhs), where);
    }
    return lhs;
  }

  expr parse_and() {
    expr lhs = parse_not();
    while (check(token_kind::kw_and)) {
      span where = advance().where;
      expr rhs = parse_not();
      lhs = make_binary(binary_op::logic_and, std::move(lhs), std::move(rhs), where);
    }
    return lhs;
  }

  expr parse_not() {
    if (check(token_kind::kw_not)) {
      span where = advance().where;
      unary_expr u;
      u.op = unary_op::logic_not;
      u.operand = std::make_unique<expr>(parse_not());
      return expr{where, std::move(u)};
    }
    return parse_comparison();
  }

  expr parse_comparison() {
    expr lhs = parse_additive();
    binary_op op;
    if (check(token_kind::eq)) op = binary_op::eq;
    else if (check(token_kind::ne)) op = binary_op::ne;
    else if (check(token_kind::lt)) op = binary_op::lt;
    else if (check(token_kind::le)) op = binary_op::le;
    else if (check(token_kind::gt)) op = binary_op::gt;
    else if (check(token_kind::ge)) op = binary_op::ge;
    else return lhs;
    span where = advance().where;
    expr rhs = parse_additive();
    return make_binary(op, std::move(lhs), std::move(rhs), where);
  }

  expr parse_additive() {
    expr lhs = parse_term();
    for (;;) {
      binary_op op;
      if (check(token_kind::plus)) op = binary_op::add;
      else if (check(token_kind::minus)) op = binary_op::sub;
      else break;
      span where = advance().where;
      expr rhs = parse_term();
      lhs = make_binary(op, std::move(lhs), std::move(rhs), where);
    }
    return lhs;
  }

  expr parse_term() {
    expr lhs = parse_unary();
    for (;;) {
      binary_op op;
      if (check(token_kind::star)) op = binary_op::mul;
      else if (check(token_kind::slash)) op = binary_op::div;
      else break;
      span where = advance().where;
      expr rhs = parse_unary();
      lhs = make_binary(op, std::move(lhs), std::move(rhs), where);
    }
    return lhs;
  }

  expr parse_unary() {
    if (check(token_kind::minus)) {
      span where = advance().where;
      unary_expr u;
      u.op = unary_op::negate;
      u.operand = std::make_unique<expr>(parse_unary());
      return expr{where, std::move(u)};
    }
    return parse_postfix();
  }

  expr parse_postfix() {
    expr e = parse_primary();
    while (check(token_kind::lbracket)) {
      span where = advance().where;
      expr first = parse_expr();
      if (match(token_kind::colon)) {
        expr hi = parse_expr();
        expect(token_kind::rbracket, "']'");
        slice_expr s;
        s.object = std::make_unique<expr>(std::move(e));
        s.lo = std::make_unique<expr>(std::move(first));
        s.hi = std::make_unique<expr>(std::move(hi));
        e = expr{where, std::move(s)};
      } else {
        expect(token_kind::rbracket, "']'");
        index_expr s;
        s.object = std::make_unique<expr>(std::move(e));
        s.index = std::make_unique<expr>(std::move(first));
        e = expr{where, std::move(s)};
      }
    }
    return e;
  }

  expr parse_primary() {
    span where = peek().where;
    if (check(token_kind::number)) {
      double v = advance().number;
      return expr{where, number_lit{v}};
    }
    if (check(token_kind::string)) {
      std::string v = advance().text;
      return expr{where, string_lit{std::move(v)}};
    }
    if (match(token_kind::kw_true)) return expr{where, bool_lit{true}};
    if (match(token_kind::kw_false)) return expr{where, bool_lit{false}};
    if (check(token_kind::ident)) {
      std::string name = advance().text;
      if (match(token_kind::lparen)) {
        call_expr call;
        call.callee = std::move(name);
        if (!check(token_kind::rparen)) {
          do {
            call.args.push_back(std::make_unique<expr>(parse_expr()));
          } while (match(token_kind::comma));
        }
        expect(token_kind::rparen, "')'");
        return expr{where, std::move(call)};
      }
      return expr{where, identifier{std::move(name)}};
    }
    if (match(token_kind::lparen)) {
      expr inner = parse_expr();
      expect(token_kind::rparen, "')'");
      return inner;
    }
    if (match(token_kind::lbracket)) {
      vector_lit vec;
      if (!check(token_kind::rbracket)) {
        do {
          vec.items.push_back(std::make_unique<expr>(parse_expr()));
        } while (match(token_kind::comma));
      }
      expect(token_kind::rbracket, "']'");
      return expr{where, std::move(vec)};
    }
    if (match(token_kind::lbrace)) {
      map_lit map;
      if (!check(token_kind::rbrace)) {
        do {
          std::string key = expect(token_kind::string, "string key").text;
          expect(token_kind::colon, "':'");
          map.entries.emplace_back(std::move(key),
                                   std::make_unique<expr>(parse_expr()));
        } while (match(token_kind::comma));
      }
      expect(token_kind::rbrace, "'}'");
      return expr{where, std::move(map)};
    }
    throw syntax_error(where, "expected an expression, found '" +
                                  describe(peek()) + "'");
  }

  static expr make_binary(binary_op op, expr lhs, expr rhs, span where) {
    binary_expr b;
    b.op = op;
    b.lhs = std::make_unique<expr>(std::move(lhs));
    b.rhs = std::make_unique<expr>(std::move(rhs));
    return expr{where, std::move(b)};
  }

  std::vector<token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

const fn_decl* program::find(const std::string& name) const {
  for (const auto& fn : functions) {
    if (fn.name == name) return &fn;
  }
  return nullptr;
}

program parse(const std::string& source) {
  check_header(source);
  return parser(tokenize(source)).run(source);
}

std::optional<value> try_const_eval(const expr& e) {
  if (const auto* n = std::get_if<number_lit>(&e.node)) return value(n->value);
  if (const auto* b = std::get_if<bool_lit>(&e.node)) return value(b->value);
  if (const auto* s = std::get_if<string_lit>(&e.node)) return value(s->value);
  if (const auto* u = std::get_if<unary_expr>(&e.node)) {
    if (u->op == unary_op::negate) {
      auto inner = try_const_eval(*u->operand);
      if (inner.has_value() && inner->is_number()) {
        return value(-inner->as_number());
      }
    }
    return std::nullopt;
  }
  if (const auto* v = std::get_if<vector_lit>(&e.node)) {
    std::vector<double> out;
    out.reserve(v->items.size());
    for (const auto& item : v->items) {
      auto folded = try_const_eval(*item);
      if (!folded.has_value() || !folded->is_number()) return std::nullopt;
      out.push_back(folded->as_number());
    }
    return value(std::move(out));
  }
  if (const auto* m = std::get_if<map_lit>(&e.node)) {
    value_map out;
    for (const auto& [key, item] : m->entries) {
      auto folded = try_const_eval(*item);
      if (!folded.has_value()) return std::nullopt;
      out.set(key, std::move(*folded));
    }
    return value(std::move(out));
  }
  return std::nullopt;
}

}  // namespace grappa::gsl
