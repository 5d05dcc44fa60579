#include "symgen/infix.hpp"

#include <cctype>

#include "symgen/errors.hpp"

namespace symgen {

namespace {

class InfixParser {
 public:
  explicit InfixParser(std::string_view text) : s_(text) {}

  Expression parse() {
    Expression e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw MalformedSequence(what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expression sum() {
    Expression e = product();
    while (true) {
      if (accept('+')) e = Expression::binary(Op::Add, e, product());
      else if (accept('-')) e = Expression::binary(Op::Sub, e, product());
      else return e;
    }
  }

  Expression product() {
    Expression e = signed_factor();
    while (true) {
      if (accept('*')) e = Expression::binary(Op::Mul, e, signed_factor());
      else if (accept('/')) e = Expression::binary(Op::Div, e, signed_factor());
      else return e;
    }
  }

  Expression signed_factor() {
    skip();
    if (accept('-')) {
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        Expression lit = Expression::integer(-number());
        return power_tail(lit);
      }
      return Expression::binary(Op::Mul, Expression::integer(-1), signed_factor());
    }
    return power_tail(atom());
  }

  Expression power_tail(Expression base) {
    if (accept('^')) return Expression::binary(Op::Pow, base, signed_factor());
    return base;
  }

  BigInt number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return BigInt(std::string(s_.substr(start, pos_ - start)));
  }

  Expression atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      Expression e = sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(s_[pos_]))) return Expression::integer(number());
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '\'')) ++pos_;
    const std::string_view word = s_.substr(start, pos_ - start);
    if (word.empty()) fail("unexpected character");
    if (auto op = op_from_token(word); op && arity(*op) == 1) {
      if (!accept('(')) fail("expected '(' after function name");
      Expression arg = sum();
      if (!accept(')')) fail("expected ')'");
      return Expression::unary(*op, arg);
    }
    if (word == "pow") {
      if (!accept('(')) fail("expected '('");
      Expression a = sum();
      if (!accept(',')) fail("expected ','");
      Expression b = sum();
      if (!accept(')')) fail("expected ')'");
      return Expression::binary(Op::Pow, a, b);
    }
    if (auto sym = symbol_from_token(word)) return Expression::symbol(*sym);
    fail("unknown name '" + std::string(word) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse_infix(std::string_view text) { return InfixParser(text).parse(); }

}  // namespace symgen
