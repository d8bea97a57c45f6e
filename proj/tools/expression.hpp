#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stosym::cli {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Arithmetic expression over named real variables.
 *
 * Supports + - * / ^, unary signs, parentheses, the constants pi and e, and
 * sin cos tan exp log sqrt abs sinh cosh tanh. `^` is right-associative and
 * binds tighter than unary minus, so -2^2 = -4 and 2^-7 = 1/128.
 */
class Expression {
 public:
  Expression() = default;
  static Expression parse(const std::string& text, std::vector<std::string> variables = {});

  /// Values are bound positionally to the variable names given to parse.
  double operator()(std::span<const double> values) const;
  double operator()(std::initializer_list<double> values) const {
    return (*this)(std::span<const double>(values.begin(), values.size()));
  }

  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  std::size_t arity_ = 0;
};

/// Evaluates a constant expression such as "sqrt(2)" or "2^-7".
double evaluate_constant(const std::string& text);

}  // namespace stosym::cli
