#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <numbers>

namespace stosym::cli {

struct Expression::Node {
  enum class Kind { number, variable, unary_minus, add, sub, mul, div, pow, call };
  Kind kind = Kind::number;
  double value = 0.0;
  std::size_t index = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(std::span<const double> v) const {
    switch (kind) {
      case Kind::number:
        return value;
      case Kind::variable:
        return v[index];
      case Kind::unary_minus:
        return -lhs->eval(v);
      case Kind::add:
        return lhs->eval(v) + rhs->eval(v);
      case Kind::sub:
        return lhs->eval(v) - rhs->eval(v);
      case Kind::mul:
        return lhs->eval(v) * rhs->eval(v);
      case Kind::div:
        return lhs->eval(v) / rhs->eval(v);
      case Kind::pow:
        return std::pow(lhs->eval(v), rhs->eval(v));
      case Kind::call:
        return fn(lhs->eval(v));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

const std::map<std::string, double (*)(double)>& functions() {
  static const std::map<std::string, double (*)(double)> table{
      {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
      {"tan", [](double x) { return std::tan(x); }},   {"exp", [](double x) { return std::exp(x); }},
      {"log", [](double x) { return std::log(x); }},   {"sqrt", [](double x) { return std::sqrt(x); }},
      {"abs", [](double x) { return std::abs(x); }},   {"sinh", [](double x) { return std::sinh(x); }},
      {"cosh", [](double x) { return std::cosh(x); }}, {"tanh", [](double x) { return std::tanh(x); }},
  };
  return table;
}

NodePtr make(Kind k, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->value = v;
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression \"" + s_ + "\": " + what + " at offset " + std::to_string(pos_));
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

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make(Kind::add, lhs, term());
      else if (accept('-'))
        lhs = make(Kind::sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Kind::mul, lhs, unary());
      else if (accept('/'))
        lhs = make(Kind::div, lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::unary_minus, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr literal() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    return number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (accept('(')) {
      const auto it = functions().find(name);
      if (it == functions().end()) fail("unknown function '" + name + "'");
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::call;
      n->fn = it->second;
      n->lhs = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::variable;
        n->index = i;
        return n;
      }
    }
    if (name == "pi") return number(std::numbers::pi);
    if (name == "e") return number(std::numbers::e);
    fail("unknown name '" + name + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, std::vector<std::string> variables) {
  Expression e;
  e.root_ = Parser(text, variables).parse();
  e.text_ = text;
  e.arity_ = variables.size();
  return e;
}

double Expression::operator()(std::span<const double> values) const {
  if (!root_) throw ExpressionError("empty expression");
  if (values.size() != arity_)
    throw ExpressionError("expression \"" + text_ + "\" expects " + std::to_string(arity_) + " values");
  return root_->eval(values);
}

double evaluate_constant(const std::string& text) { return Expression::parse(text)(std::span<const double>{}); }

}  // namespace stosym::cli
