#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gvf3d {

/// Abstract syntax tree of a smooth scalar expression in x, y, z.
///
/// Value type: children are held by value, and two trees compare equal iff
/// they are structurally identical (same node kinds, literals, exponents).
struct Expression {
  enum class Kind { Number, Variable, Add, Sub, Mul, Div, Neg, Pow, Call };
  enum class Function { Sin, Cos, Tan, Exp, Ln, Sqrt };

  Kind kind = Kind::Number;
  double number = 0.0;          // Number
  int variable = 0;             // Variable: 0 = x, 1 = y, 2 = z
  int exponent = 0;             // Pow
  Function function = Function::Sin;  // Call
  std::vector<Expression> children;

  static Expression literal(double v);
  static Expression var(int axis);
  static Expression unary(Kind k, Expression operand);
  static Expression binary(Kind k, Expression lhs, Expression rhs);
  static Expression power(Expression base, int exponent);
  static Expression call(Function f, Expression arg);

  bool operator==(const Expression&) const = default;
};

const char* function_name(Expression::Function f);

/// Error raised for any rejected expression source.
class ParseError : public std::runtime_error {
 public:
  enum class Reason { Syntax, UnknownIdentifier, NonSmooth };

  ParseError(Reason reason, std::size_t offset, std::string message, std::vector<std::string> expected = {});

  Reason reason() const { return reason_; }
  /// Byte offset of the first offending character in the source.
  std::size_t offset() const { return offset_; }
  /// Tokens that would have been accepted at offset (syntax errors only).
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  Reason reason_;
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Parses source against the grammar
///
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := ("-")? atom ("^" integer)?
///   atom   := number | "x" | "y" | "z" | func "(" expr ")" | "(" expr ")"
///   func   := "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt"
///
/// Whitespace is insignificant. Constructs that are not twice continuously
/// differentiable everywhere (abs, min, max, fractional powers, ...) are
/// rejected with ParseError::Reason::NonSmooth.
Expression parse_expression(std::string_view source);

/// Renders the tree with the minimum parentheses needed so that
/// parse_expression(to_string(e)) == e for every tree produced by the parser.
std::string to_string(const Expression& e);

}  // namespace gvf3d
