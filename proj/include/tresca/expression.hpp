#pragma once

#include <memory>
#include <string>

#include "tresca/errors.hpp"

namespace tresca {

/// Syntax error in an expression; `column` is 1-based.
class ExpressionError : public InvalidArgument {
public:
  ExpressionError(const std::string& what, std::size_t column)
      : InvalidArgument(what + " at column " + std::to_string(column)), column_(column) {}
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

/// Arithmetic over (x, t): numbers, pi, + - * / with unary minus,
/// parentheses, sin cos exp (one argument) and min max (two).
class Expression {
public:
  static Expression parse(const std::string& text);

  double operator()(double x, double t) const;
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

} // namespace tresca
