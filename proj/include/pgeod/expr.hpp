#pragma once

// Small arithmetic-expression evaluator for user-defined metric coefficients.
//
// Grammar (whitespace ignored):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'
//
// Identifiers are the variables x, y, the constants pi and e, or any name
// bound in the parameter map passed to parse(). Functions: sin cos sqrt exp.

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include "pgeod/error.hpp"

namespace pgeod::expr {

/// Value with its partial derivatives in x and y.
struct Dual {
  double v = 0.0, dx = 0.0, dy = 0.0;
};

class Node {
 public:
  virtual ~Node() = default;
  virtual double eval(double x, double y) const = 0;
  /// Forward-mode derivative; exact up to rounding.
  virtual Dual diff(double x, double y) const = 0;
  virtual bool uses_x() const = 0;
};

using NodePtr = std::shared_ptr<const Node>;

namespace detail {

class Constant final : public Node {
 public:
  explicit Constant(double v) : value_(v) {}
  double eval(double, double) const override { return value_; }
  Dual diff(double, double) const override { return {value_, 0.0, 0.0}; }
  bool uses_x() const override { return false; }

 private:
  double value_;
};

class Variable final : public Node {
 public:
  explicit Variable(bool is_x) : is_x_(is_x) {}
  double eval(double x, double y) const override { return is_x_ ? x : y; }
  Dual diff(double x, double y) const override { return is_x_ ? Dual{x, 1.0, 0.0} : Dual{y, 0.0, 1.0}; }
  bool uses_x() const override { return is_x_; }

 private:
  bool is_x_;
};

class Unary final : public Node {
 public:
  enum class Op { Neg, Sin, Cos, Sqrt, Exp };
  Unary(Op op, NodePtr arg) : op_(op), arg_(std::move(arg)) {}

  double eval(double x, double y) const override {
    const double v = arg_->eval(x, y);
    switch (op_) {
      case Op::Neg: return -v;
      case Op::Sin: return std::sin(v);
      case Op::Cos: return std::cos(v);
      case Op::Sqrt: return std::sqrt(v);
      case Op::Exp: return std::exp(v);
    }
    return v;
  }
  Dual diff(double x, double y) const override {
    const Dual u = arg_->diff(x, y);
    double v = u.v, k = 1.0;
    switch (op_) {
      case Op::Neg: v = -u.v; k = -1.0; break;
      case Op::Sin: v = std::sin(u.v); k = std::cos(u.v); break;
      case Op::Cos: v = std::cos(u.v); k = -std::sin(u.v); break;
      case Op::Sqrt: v = std::sqrt(u.v); k = 0.5 / v; break;
      case Op::Exp: v = std::exp(u.v); k = v; break;
    }
    return {v, k * u.dx, k * u.dy};
  }
  bool uses_x() const override { return arg_->uses_x(); }

 private:
  Op op_;
  NodePtr arg_;
};

inline double int_pow(double b, int n) {
  double acc = 1.0;
  for (int i = 0; i < std::abs(n); ++i) acc *= b;
  return n < 0 ? 1.0 / acc : acc;
}

// Integer exponents go through repeated multiplication so that negative
// bases stay real (y^3 for y < 0).
inline bool small_integer(double r) { return std::round(r) == r && std::abs(r) <= 64; }

inline double power(double l, double r) {
  return small_integer(r) ? int_pow(l, static_cast<int>(r)) : std::pow(l, r);
}

class Binary final : public Node {
 public:
  Binary(char op, NodePtr lhs, NodePtr rhs) : op_(op), lhs_(std::move(lhs)), rhs_(std::move(rhs)) {}

  double eval(double x, double y) const override {
    const double l = lhs_->eval(x, y);
    const double r = rhs_->eval(x, y);
    switch (op_) {
      case '+': return l + r;
      case '-': return l - r;
      case '*': return l * r;
      case '/': return l / r;
      case '^': return power(l, r);
    }
    return 0.0;
  }
  Dual diff(double x, double y) const override {
    const Dual l = lhs_->diff(x, y);
    const Dual r = rhs_->diff(x, y);
    switch (op_) {
      case '+': return {l.v + r.v, l.dx + r.dx, l.dy + r.dy};
      case '-': return {l.v - r.v, l.dx - r.dx, l.dy - r.dy};
      case '*': return {l.v * r.v, l.dx * r.v + l.v * r.dx, l.dy * r.v + l.v * r.dy};
      case '/': {
        const double q = l.v / r.v;
        return {q, (l.dx - q * r.dx) / r.v, (l.dy - q * r.dy) / r.v};
      }
      case '^': {
        const double v = power(l.v, r.v);
        // d(l^r) = r l^(r-1) dl + l^r ln(l) dr; the second term only when r varies.
        const double k = r.v == 0.0 ? 0.0 : r.v * power(l.v, r.v - 1.0);
        Dual out{v, k * l.dx, k * l.dy};
        if (r.dx != 0.0 || r.dy != 0.0) {
          const double lg = v * std::log(l.v);
          out.dx += lg * r.dx;
          out.dy += lg * r.dy;
        }
        return out;
      }
    }
    return {};
  }
  bool uses_x() const override { return lhs_->uses_x() || rhs_->uses_x(); }

 private:
  char op_;
  NodePtr lhs_;
  NodePtr rhs_;
};

class Parser {
 public:
  Parser(std::string_view text, const std::map<std::string, double>& params)
      : text_(text), params_(params) {}

  NodePtr parse() {
    NodePtr node = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                msg + " at position " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
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

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = std::make_shared<Binary>('+', lhs, parse_term());
      } else if (accept('-')) {
        lhs = std::make_shared<Binary>('-', lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = std::make_shared<Binary>('*', lhs, parse_unary());
      } else if (accept('/')) {
        lhs = std::make_shared<Binary>('/', lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return std::make_shared<Unary>(Unary::Op::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return std::make_shared<Binary>('^', base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    return std::make_shared<Constant>(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));

    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      Unary::Op op{};
      if (name == "sin") {
        op = Unary::Op::Sin;
      } else if (name == "cos") {
        op = Unary::Op::Cos;
      } else if (name == "sqrt") {
        op = Unary::Op::Sqrt;
      } else if (name == "exp") {
        op = Unary::Op::Exp;
      } else {
        pos_ = start;
        fail("unknown function '" + name + "'");
      }
      ++pos_;
      NodePtr arg = parse_expr();
      if (!accept(')')) fail("expected ')' after function argument");
      return std::make_shared<Unary>(op, arg);
    }

    if (name == "x") return std::make_shared<Variable>(true);
    if (name == "y") return std::make_shared<Variable>(false);
    if (auto it = params_.find(name); it != params_.end()) return std::make_shared<Constant>(it->second);
    if (name == "pi") return std::make_shared<Constant>(std::numbers::pi);
    if (name == "e") return std::make_shared<Constant>(std::numbers::e);
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view text_;
  const std::map<std::string, double>& params_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text` into an immutable expression tree. Throws Error(ParseError).
inline NodePtr parse(std::string_view text, const std::map<std::string, double>& params = {}) {
  return detail::Parser(text, params).parse();
}

}  // namespace pgeod::expr
