#pragma once

// Formula text syntax:
//   iff   := impl ('<=>' impl)*
//   impl  := or ('=>' impl)?
//   or    := and ('|' and)*
//   and   := unary ('&' unary)*
//   unary := '~' unary | 'true' | 'false' | '(' iff ')' | atom
//   atom  := name | name '(' term (',' term)* ')'

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "cmln/error.hpp"
#include "cmln/logic.hpp"

namespace cmln {

namespace detail {

class FormulaParser {
 public:
  FormulaParser(std::string_view text, std::size_t line, std::size_t column)
      : text_(text), line_(line), column_(column) {}

  Formula parse_all() {
    Formula f = parse_iff();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, column_ + pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_space();
    if (text_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }

  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string identifier() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    if (start == pos_) {
      if (pos_ >= text_.size()) fail("unexpected end of formula");
      fail("expected identifier, found '" + std::string(1, text_[pos_]) + "'");
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Formula parse_iff() {
    Formula f = parse_impl();
    while (accept("<=>")) f = Formula::equivalence(f, parse_impl());
    return f;
  }

  Formula parse_impl() {
    Formula f = parse_or();
    if (accept("=>")) return Formula::implication(f, parse_impl());
    return f;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (accept("|")) f = f | parse_and();
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (accept("&")) f = f & parse_unary();
    return f;
  }

  Formula parse_unary() {
    if (accept("~")) return ~parse_unary();
    if (accept("(")) {
      Formula f = parse_iff();
      if (!accept(")")) fail("expected ')'");
      return f;
    }
    std::size_t start = pos_;
    std::string name = identifier();
    if (name == "true") return Formula::top();
    if (name == "false") return Formula::bottom();
    if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) {
      pos_ = start;
      skip_space();
      fail("predicate name must start with a letter: " + name);
    }
    std::vector<Term> args;
    if (accept("(")) {
      do {
        skip_space();
        std::size_t at = pos_;
        std::string t = identifier();
        if (is_variable_name(t))
          args.push_back(Term::variable(t));
        else if (is_constant_name(t))
          args.push_back(Term::constant(t));
        else {
          pos_ = at;
          fail("term must start with a lowercase (variable) or uppercase (constant) letter: " + t);
        }
      } while (accept(","));
      if (!accept(")")) fail("expected ')' or ','");
    }
    return Formula::make_atom(Atom(std::move(name), std::move(args)));
  }

  std::string_view text_;
  std::size_t line_, column_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Errors report 1-based line/column; the optional origin shifts them for
// formulas embedded in larger files.
inline Formula parse_formula(std::string_view text, std::size_t line = 1, std::size_t column = 1) {
  return detail::FormulaParser(text, line, column).parse_all();
}

}  // namespace cmln
