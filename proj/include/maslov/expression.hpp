#pragma once
// Coefficient expressions in the variable x: numbers, pi, x, unary minus, + - * / ^
// (right-associative), sin, cos and parentheses.

#include "maslov/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>

namespace maslov {

class Expression {
 public:
  enum class Kind { number, pi, x, neg, add, sub, mul, div, pow, sin, cos };

  struct Node {
    Kind kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;
  };

  Expression() : root_(leaf(Kind::number)) {}

  /// Parses `text`; errors report `line` and 1-based columns offset by `column`.
  static Expression parse(std::string_view text, int line = 1, int column = 1) {
    Parser p{text, 0, line, column};
    p.skip();
    if (p.pos == text.size()) p.fail("empty expression");
    Expression e(p.expr());
    p.skip();
    if (p.pos != text.size()) p.fail(std::string("unexpected '") + text[p.pos] + "'");
    return e;
  }

  static Expression constant(double v) { return Expression(leaf(Kind::number, v)); }

  double operator()(double x) const { return eval(*root_, x); }

  /// References the variable x.
  bool depends_on_x() const { return uses_x(*root_); }

  /// Text that parses back to an equal tree.
  std::string serialize() const { return write(*root_, 0); }

  const Node& root() const noexcept { return *root_; }

  friend bool operator==(const Expression& a, const Expression& b) { return same(*a.root_, *b.root_); }
  friend bool operator!=(const Expression& a, const Expression& b) { return !(a == b); }

 private:
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  static NodePtr leaf(Kind k, double v = 0.0) { return std::make_shared<const Node>(Node{k, v, nullptr, nullptr}); }
  static NodePtr unary(Kind k, NodePtr a) { return std::make_shared<const Node>(Node{k, 0.0, std::move(a), nullptr}); }
  static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
    return std::make_shared<const Node>(Node{k, 0.0, std::move(a), std::move(b)});
  }

  struct Parser {
    std::string_view s;
    std::size_t pos;
    int line;
    int column;

    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigError(what, line, column + static_cast<int>(pos));
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    NodePtr expr() {
      NodePtr a = term();
      for (;;) {
        if (eat('+'))
          a = binary(Kind::add, a, term());
        else if (eat('-'))
          a = binary(Kind::sub, a, term());
        else
          return a;
      }
    }
    NodePtr term() {
      NodePtr a = factor();
      for (;;) {
        if (eat('*'))
          a = binary(Kind::mul, a, factor());
        else if (eat('/'))
          a = binary(Kind::div, a, factor());
        else
          return a;
      }
    }
    NodePtr factor() {
      if (eat('-')) return unary(Kind::neg, factor());
      NodePtr base = primary();
      if (eat('^')) return binary(Kind::pow, base, factor());
      return base;
    }
    NodePtr primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of expression");
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string_view word = s.substr(start, pos - start);
        if (word == "x") return leaf(Kind::x);
        if (word == "pi") return leaf(Kind::pi);
        if (word == "sin" || word == "cos") {
          if (!eat('(')) fail("expected '(' after " + std::string(word));
          NodePtr arg = expr();
          if (!eat(')')) fail("expected ')'");
          return unary(word == "sin" ? Kind::sin : Kind::cos, arg);
        }
        pos = start;
        fail("unknown name '" + std::string(word) + "'");
      }
      if (eat('(')) {
        NodePtr inner = expr();
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      fail(std::string("unexpected '") + c + "'");
    }
    NodePtr number() {
      const std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos < s.size() && s[pos] == '.') ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        std::size_t q = pos + 1;
        if (q < s.size() && (s[q] == '+' || s[q] == '-')) ++q;
        if (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) {
          pos = q;
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        }
      }
      const std::string lit(s.substr(start, pos - start));
      if (lit == ".") {
        pos = start;
        fail("malformed number");
      }
      return leaf(Kind::number, std::strtod(lit.c_str(), nullptr));
    }
  };

  static double eval(const Node& n, double x) {
    switch (n.kind) {
      case Kind::number: return n.value;
      case Kind::pi: return 3.14159265358979323846;
      case Kind::x: return x;
      case Kind::neg: return -eval(*n.lhs, x);
      case Kind::add: return eval(*n.lhs, x) + eval(*n.rhs, x);
      case Kind::sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
      case Kind::mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
      case Kind::div: {
        const double d = eval(*n.rhs, x);
        if (d == 0.0) throw EvaluationError("division by zero at x = " + std::to_string(x));
        return eval(*n.lhs, x) / d;
      }
      case Kind::pow: {
        const double r = std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
        if (!std::isfinite(r)) throw EvaluationError("power is undefined at x = " + std::to_string(x));
        return r;
      }
      case Kind::sin: return std::sin(eval(*n.lhs, x));
      case Kind::cos: return std::cos(eval(*n.lhs, x));
    }
    return 0.0;
  }

  static bool uses_x(const Node& n) {
    if (n.kind == Kind::x) return true;
    return (n.lhs && uses_x(*n.lhs)) || (n.rhs && uses_x(*n.rhs));
  }

  static bool same(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Kind::number) return a.value == b.value;
    if (bool(a.lhs) != bool(b.lhs) || bool(a.rhs) != bool(b.rhs)) return false;
    return (!a.lhs || same(*a.lhs, *b.lhs)) && (!a.rhs || same(*a.rhs, *b.rhs));
  }

  static std::string number_text(double v) {
    char buf[32];
    for (int digits = 15; digits <= 17; ++digits) {
      std::snprintf(buf, sizeof buf, "%.*g", digits, v);
      if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
  }

  static int precedence(Kind k) {
    switch (k) {
      case Kind::add:
      case Kind::sub: return 1;
      case Kind::mul:
      case Kind::div: return 2;
      case Kind::neg: return 3;
      case Kind::pow: return 4;
      default: return 5;
    }
  }

  /// Parenthesizes whenever the child binds no tighter than `ctx`.
  static std::string write(const Node& n, int ctx) {
    std::string out;
    const int p = precedence(n.kind);
    switch (n.kind) {
      case Kind::number: out = number_text(n.value); break;
      case Kind::pi: out = "pi"; break;
      case Kind::x: out = "x"; break;
      case Kind::neg: out = "-" + write(*n.lhs, p); break;
      case Kind::sin: return "sin(" + write(*n.lhs, 0) + ")";
      case Kind::cos: return "cos(" + write(*n.lhs, 0) + ")";
      case Kind::add: out = write(*n.lhs, p - 1) + " + " + write(*n.rhs, p); break;
      case Kind::sub: out = write(*n.lhs, p - 1) + " - " + write(*n.rhs, p); break;
      case Kind::mul: out = write(*n.lhs, p - 1) + "*" + write(*n.rhs, p); break;
      case Kind::div: out = write(*n.lhs, p - 1) + "/" + write(*n.rhs, p); break;
      case Kind::pow: out = write(*n.lhs, p) + "^" + write(*n.rhs, p - 1); break;
    }
    if (n.kind == Kind::number && n.value < 0) return "(" + out + ")";
    return p <= ctx ? "(" + out + ")" : out;
  }

  NodePtr root_;
};

}  // namespace maslov
