#include "cartan/parse.hpp"

#include <cctype>
#include <string>

#include "cartan/errors.hpp"

namespace cartan {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression parse error at offset " + std::to_string(pos_) + ": " + msg, pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr d = unary();
        if (d.is_zero()) {
          pos_ = at;
          fail("division by the zero expression");
        }
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      const std::size_t at = pos_;
      Expr ex = unary();
      auto c = ex.constant_value();
      if (!c || c->get_den() != 1 || !c->get_num().fits_sint_p()) {
        pos_ = at;
        fail("exponent must be an integer constant");
      }
      const int n = static_cast<int>(c->get_num().get_si());
      if (n < 0 && base.is_zero()) {
        pos_ = at;
        fail("negative power of zero");
      }
      return pow(base, n);
    }
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(text_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        ++pos_;
        Expr arg = expression();
        if (!accept(')')) fail("expected ')' after function argument");
        if (name == "sin") return sin(arg);
        if (name == "cos") return cos(arg);
        if (name == "exp") return exp(arg);
        if (name == "ln") {
          if (arg.is_zero()) fail("ln of zero");
          return ln(arg);
        }
        pos_ = start;
        fail("unknown function '" + name + "'");
      }
      return Expr::symbol(std::move(name));
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    std::string digits;
    int frac_digits = 0;
    bool dot = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits.push_back(c);
        if (dot) ++frac_digits;
      } else if (c == '.' && !dot) {
        dot = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (digits.empty()) {
      pos_ = start;
      fail("malformed number");
    }
    mpz_class num(digits, 10);
    mpz_class den = 1;
    for (int i = 0; i < frac_digits; ++i) den *= 10;
    Rational r(num, den);
    r.canonicalize();
    return Expr(r);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

}  // namespace cartan
