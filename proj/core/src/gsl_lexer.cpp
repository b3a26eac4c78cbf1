#include "grappa/gsl/lexer.hpp"

#include <cctype>
#include <cstdlib>
#include <map>

namespace grappa::gsl {

namespace {

const std::map<std::string, token_kind>& keywords() {
  static const std::map<std::string, token_kind> table = {
      {"fn", token_kind::kw_fn},     {"let", token_kind::kw_let},
      {"if", token_kind::kw_if},     {"else", token_kind::kw_else},
      {"for", token_kind::kw_for},   {"in", token_kind::kw_in},
      {"return", token_kind::kw_return}, {"and", token_kind::kw_and},
      {"or", token_kind::kw_or},     {"not", token_kind::kw_not},
      {"true", token_kind::kw_true}, {"false", token_kind::kw_false},
  };
  return table;
}

class lexer {
 public:
  explicit lexer(const std::string& source) : src_(source) {}

  std::vector<token> run() {
    std::vector<token> out;
    for (;;) {
      skip_trivia();
      if (at_end()) break;
      out.push_back(next_token());
    }
    out.push_back(token{token_kind::end, "", 0.0, here()});
    return out;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[pos_]; }
  char peek2() const { return pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0'; }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  span here() const { return span{line_, col_}; }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  token next_token() {
    span where = here();
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek2())))) {
      return lex_number(where);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return lex_ident(where);
    }
    if (c == '"' || c == '\'') return lex_string(where);
    return lex_symbol(where);
  }

  token lex_number(span where) {
    std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) ||
                         peek() == '.')) {
      advance();
    }
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      std::size_t mark = pos_;
      advance();
      if (!at_end() && (peek() == '+' || peek() == '-')) advance();
      if (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
          advance();
        }
      } else {
        pos_ = mark;  // 'e' belonged to something else
      }
    }
    std::string text = src_.substr(start, pos_ - start);
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == nullptr || *end != '\0') {
      throw syntax_error(where, "malformed number '" + text + "'");
    }
    return token{token_kind::number, text, v, where};
  }

  token lex_ident(span where) {
    std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                         peek() == '_')) {
      advance();
    }
    std::string text = src_.substr(start, pos_ - start);
    auto it = keywords().find(text);
    if (it != keywords().end()) return token{it->second, text, 0.0, where};
    return token{token_kind::ident, text, 0.0, where};
  }

  token lex_string(span where) {
    char quote = advance();
    std::string text;
    while (!at_end() && peek() != quote) {
      char c = advance();
      if (c == '\n') throw syntax_error(where, "unterminated string");
      if (c == '\\' && !at_end()) {
        char esc = advance();
        switch (esc) {
          case 'n': text.push_back('\n'); break;
          case 't': text.push_back('\t'); break;
          case '\\': text.push_back('\\'); break;
          case '"': text.push_back('"'); break;
          case '\'': text.push_back('\''); break;
          default:
            throw syntax_error(here(), std::string("unknown escape '\\") + esc + "'");
        }
      } else {
        text.push_back(c);
      }
    }
    if (at_end()) throw syntax_error(where, "unterminated string");
    advance();  // closing quote
    return token{token_kind::string, text, 0.0, where};
  }

  token lex_symbol(span where) {
    char c = advance();
    auto two = [&](char second, token_kind yes, token_kind no) {
      if (peek() == second) {
        advance();
        return yes;
      }
      return no;
    };
    token_kind kind;
    switch (c) {
      case '(': kind = token_kind::lparen; break;
      case ')': kind = token_kind::rparen; break;
      case '{': kind = token_kind::lbrace; break;
      case '}': kind = token_kind::rbrace; break;
      case '[': kind = token_kind::lbracket; break;
      case ']': kind = token_kind::rbracket; break;
      case ',': kind = token_kind::comma; break;
      case ';': kind = token_kind::semicolon; break;
      case ':': kind = token_kind::colon; break;
      case '+': kind = token_kind::plus; break;
      case '-': kind = token_kind::minus; break;
      case '*': kind = token_kind::star; break;
      case '/': kind = token_kind::slash; break;
      case '=': kind = two('=', token_kind::eq, token_kind::assign); break;
      case '<': kind = two('=', token_kind::le, token_kind::lt); break;
      case '>': kind = two('=', token_kind::ge, token_kind::gt); break;
      case '!':
        if (peek() == '=') {
          advance();
          kind = token_kind::ne;
          break;
        }
        throw syntax_error(where, "unexpected character '!'");
      default:
        throw syntax_error(where, std::string("unexpected character '") + c + "'");
    }
    return token{kind, std::string(1, c), 0.0, where};
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<token> tokenize(const std::string& source) {
  return lexer(source).run();
}

}  // namespace grappa::gsl
