#pragma once

// Scalar expressions over chart coordinates x1..xn.
//
// Grammar (whitespace-insensitive, standard precedence, '^' right-associative):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' digits | func '(' expr ')' | 'pow' '(' expr ',' expr ')' | '(' expr ')'
//   func    := sin | cos | sinh | cosh | exp | log | sqrt
//
// Exponents must fold to a constant.

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace bmcd {

class Expr {
 public:
  enum class Kind { Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Sinh, Cosh, Exp, Log, Sqrt };

  struct Node;

  Expr();  // the constant 0
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static Expr constant(double value);
  static Expr variable(int index);  // 1-based

  Kind kind() const;
  double constant_value() const;  // Kind::Constant only
  int variable_index() const;     // Kind::Variable only
  bool is_constant(double value) const;
  /// Largest variable index referenced (0 for constant expressions).
  int max_variable() const;

  double evaluate(std::span<const double> coords) const;
  Expr derivative(int var) const;
  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  static Expr pow(const Expr& base, double exponent);
  static Expr call(Func f, const Expr& arg);

  const Node& node() const { return *node_; }

 private:
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  Kind kind = Kind::Constant;
  double value = 0.0;  // constant value, or exponent for Pow
  int index = 0;       // variable index
  Func func = Func::Sin;
  Expr lhs{nullptr};  // unused children stay empty
  Expr rhs{nullptr};
};

/// Parses `src` with variables x1..x<dim>. Throws ParseError.
Expr parse_expression(std::string_view src, int dim);

/// Symbolic partial derivative with respect to x<var> (1-based).
Expr differentiate(const Expr& e, int var);

/// IEEE double evaluation; throws DomainError on log/sqrt/pow domain violations.
double evaluate(const Expr& e, std::span<const double> coords);

}  // namespace bmcd
