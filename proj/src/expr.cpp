#include "bmcd/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "bmcd/error.hpp"

namespace bmcd {

namespace {

std::shared_ptr<const Expr::Node> make_node(Expr::Node n) { return std::make_shared<const Expr::Node>(std::move(n)); }

Expr binary(Expr::Kind kind, const Expr& a, const Expr& b) {
  Expr::Node n;
  n.kind = kind;
  n.lhs = a;
  n.rhs = b;
  return Expr(make_node(std::move(n)));
}

const char* func_name(Expr::Func f) {
  switch (f) {
    case Expr::Func::Sin: return "sin";
    case Expr::Func::Cos: return "cos";
    case Expr::Func::Sinh: return "sinh";
    case Expr::Func::Cosh: return "cosh";
    case Expr::Func::Exp: return "exp";
    case Expr::Func::Log: return "log";
    case Expr::Func::Sqrt: return "sqrt";
  }
  return "?";
}

double apply(Expr::Func f, double v) {
  switch (f) {
    case Expr::Func::Sin: return std::sin(v);
    case Expr::Func::Cos: return std::cos(v);
    case Expr::Func::Sinh: return std::sinh(v);
    case Expr::Func::Cosh: return std::cosh(v);
    case Expr::Func::Exp: return std::exp(v);
    case Expr::Func::Log: return std::log(v);
    case Expr::Func::Sqrt: return std::sqrt(v);
  }
  return 0.0;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0) return "(" + s + ")";
  return s;
}

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Neg: return 3;
    case Expr::Kind::Pow: return 4;
    default: return 5;
  }
}

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail(ParseError::Kind::Syntax, "unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const { throw ParseError(kind, pos_, msg); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(ParseError::Kind::Syntax, std::string("expected '") + c + "'");
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        lhs = lhs / unary();
      } else {
        return lhs;
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
      std::size_t at = pos_;
      Expr ex = unary();
      if (ex.kind() != Expr::Kind::Constant) throw ParseError(ParseError::Kind::NonConstantExponent, at, "exponent must be constant");
      return Expr::pow(base, ex.constant_value());
    }
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail(ParseError::Kind::Syntax, "unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(ParseError::Kind::Syntax, "unexpected character");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) {
      pos_ = start;
      fail(ParseError::Kind::Syntax, "malformed number");
    }
    return Expr::constant(v);
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::string_view id = src_.substr(start, pos_ - start);

    if (id.size() > 1 && id[0] == 'x') {
      bool digits = true;
      for (char d : id.substr(1)) digits = digits && std::isdigit(static_cast<unsigned char>(d));
      if (digits) {
        long idx = std::stol(std::string(id.substr(1)));
        if (idx < 1 || idx > dim_) throw ParseError(ParseError::Kind::VariableOutOfRange, start, "variable index out of range: " + std::string(id));
        return Expr::variable(static_cast<int>(idx));
      }
    }

    static constexpr struct {
      std::string_view name;
      Expr::Func func;
    } kFuncs[] = {{"sin", Expr::Func::Sin},   {"cos", Expr::Func::Cos}, {"sinh", Expr::Func::Sinh}, {"cosh", Expr::Func::Cosh},
                  {"exp", Expr::Func::Exp},   {"log", Expr::Func::Log}, {"sqrt", Expr::Func::Sqrt}};
    for (const auto& f : kFuncs) {
      if (id == f.name) {
        expect('(');
        Expr arg = expr();
        expect(')');
        return Expr::call(f.func, arg);
      }
    }
    if (id == "pow") {
      expect('(');
      Expr base = expr();
      expect(',');
      std::size_t at = pos_;
      Expr ex = expr();
      expect(')');
      if (ex.kind() != Expr::Kind::Constant) throw ParseError(ParseError::Kind::NonConstantExponent, at, "exponent must be constant");
      return Expr::pow(base, ex.constant_value());
    }
    throw ParseError(ParseError::Kind::UnknownIdentifier, start, "unknown identifier '" + std::string(id) + "'");
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr() {
  static const std::shared_ptr<const Node> zero = make_node(Node{});
  node_ = zero;
}

Expr Expr::constant(double value) {
  Node n;
  n.kind = Kind::Constant;
  n.value = value;
  return Expr(make_node(std::move(n)));
}

Expr Expr::variable(int index) {
  Node n;
  n.kind = Kind::Variable;
  n.index = index;
  return Expr(make_node(std::move(n)));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::constant_value() const { return node_->value; }
int Expr::variable_index() const { return node_->index; }
bool Expr::is_constant(double value) const { return node_->kind == Kind::Constant && node_->value == value; }

int Expr::max_variable() const {
  switch (node_->kind) {
    case Kind::Constant: return 0;
    case Kind::Variable: return node_->index;
    case Kind::Neg:
    case Kind::Pow:
    case Kind::Call: return node_->lhs.max_variable();
    default: return std::max(node_->lhs.max_variable(), node_->rhs.max_variable());
  }
}

// Constructors fold constants and drop neutral elements; nothing more.
Expr operator+(const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::Constant && b.kind() == Expr::Kind::Constant) return Expr::constant(a.constant_value() + b.constant_value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return binary(Expr::Kind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::Constant && b.kind() == Expr::Kind::Constant) return Expr::constant(a.constant_value() - b.constant_value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return binary(Expr::Kind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::Constant && b.kind() == Expr::Kind::Constant) return Expr::constant(a.constant_value() * b.constant_value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return binary(Expr::Kind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::Constant && b.kind() == Expr::Kind::Constant && b.constant_value() != 0.0)
    return Expr::constant(a.constant_value() / b.constant_value());
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  if (b.is_constant(1.0)) return a;
  return binary(Expr::Kind::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.kind() == Expr::Kind::Constant) return Expr::constant(-a.constant_value());
  if (a.kind() == Expr::Kind::Neg) return a.node().lhs;
  Expr::Node n;
  n.kind = Expr::Kind::Neg;
  n.lhs = a;
  return Expr(make_node(std::move(n)));
}

Expr Expr::pow(const Expr& base, double exponent) {
  if (exponent == 0.0) return constant(1.0);
  if (exponent == 1.0) return base;
  if (base.kind() == Kind::Constant) {
    double v = std::pow(base.constant_value(), exponent);
    if (std::isfinite(v)) return constant(v);
  }
  Node n;
  n.kind = Kind::Pow;
  n.lhs = base;
  n.value = exponent;
  return Expr(make_node(std::move(n)));
}

Expr Expr::call(Func f, const Expr& arg) {
  if (arg.kind() == Kind::Constant) {
    double v = apply(f, arg.constant_value());
    if (std::isfinite(v)) return constant(v);
  }
  Node n;
  n.kind = Kind::Call;
  n.func = f;
  n.lhs = arg;
  return Expr(make_node(std::move(n)));
}

double Expr::evaluate(std::span<const double> x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant: return n.value;
    case Kind::Variable:
      if (static_cast<std::size_t>(n.index) > x.size()) throw InputError("coordinate vector shorter than variable index x" + std::to_string(n.index));
      return x[n.index - 1];
    case Kind::Neg: return -n.lhs.evaluate(x);
    case Kind::Add: return n.lhs.evaluate(x) + n.rhs.evaluate(x);
    case Kind::Sub: return n.lhs.evaluate(x) - n.rhs.evaluate(x);
    case Kind::Mul: return n.lhs.evaluate(x) * n.rhs.evaluate(x);
    case Kind::Div: {
      double d = n.rhs.evaluate(x);
      if (d == 0.0) throw DomainError(to_string(), "division by zero");
      return n.lhs.evaluate(x) / d;
    }
    case Kind::Pow: {
      double b = n.lhs.evaluate(x);
      if (b < 0.0 && n.value != std::floor(n.value)) throw DomainError(to_string(), "non-integer power of negative base");
      if (b == 0.0 && n.value < 0.0) throw DomainError(to_string(), "negative power of zero");
      return std::pow(b, n.value);
    }
    case Kind::Call: {
      double a = n.lhs.evaluate(x);
      if (n.func == Func::Log && a <= 0.0) throw DomainError(to_string(), "log of non-positive value");
      if (n.func == Func::Sqrt && a < 0.0) throw DomainError(to_string(), "sqrt of negative value");
      double v = apply(n.func, a);
      if (!std::isfinite(v)) throw DomainError(to_string(), "non-finite result");
      return v;
    }
  }
  return 0.0;
}

Expr Expr::derivative(int var) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant: return constant(0.0);
    case Kind::Variable: return constant(n.index == var ? 1.0 : 0.0);
    case Kind::Neg: return -n.lhs.derivative(var);
    case Kind::Add: return n.lhs.derivative(var) + n.rhs.derivative(var);
    case Kind::Sub: return n.lhs.derivative(var) - n.rhs.derivative(var);
    case Kind::Mul: return n.lhs.derivative(var) * n.rhs + n.lhs * n.rhs.derivative(var);
    case Kind::Div: {
      Expr du = n.lhs.derivative(var);
      Expr dv = n.rhs.derivative(var);
      if (dv.is_constant(0.0)) return du / n.rhs;
      return (du * n.rhs - n.lhs * dv) / pow(n.rhs, 2.0);
    }
    case Kind::Pow: return constant(n.value) * pow(n.lhs, n.value - 1.0) * n.lhs.derivative(var);
    case Kind::Call: {
      Expr du = n.lhs.derivative(var);
      if (du.is_constant(0.0)) return constant(0.0);
      const Expr& u = n.lhs;
      switch (n.func) {
        case Func::Sin: return call(Func::Cos, u) * du;
        case Func::Cos: return -(call(Func::Sin, u) * du);
        case Func::Sinh: return call(Func::Cosh, u) * du;
        case Func::Cosh: return call(Func::Sinh, u) * du;
        case Func::Exp: return *this * du;
        case Func::Log: return du / u;
        case Func::Sqrt: return du / (constant(2.0) * *this);
      }
    }
  }
  return constant(0.0);
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  auto wrap = [](const Expr& child, int parent_prec, bool strict) {
    std::string s = child.to_string();
    int p = precedence(child.kind());
    if (p < parent_prec || (strict && p == parent_prec)) return "(" + s + ")";
    return s;
  };
  switch (n.kind) {
    case Kind::Constant: return format_number(n.value);
    case Kind::Variable: return "x" + std::to_string(n.index);
    case Kind::Neg: return "-" + wrap(n.lhs, 4, false);
    case Kind::Add: return wrap(n.lhs, 1, false) + " + " + wrap(n.rhs, 1, true);
    case Kind::Sub: return wrap(n.lhs, 1, false) + " - " + wrap(n.rhs, 1, true);
    case Kind::Mul: return wrap(n.lhs, 2, false) + "*" + wrap(n.rhs, 2, true);
    case Kind::Div: return wrap(n.lhs, 2, false) + "/" + wrap(n.rhs, 2, true);
    case Kind::Pow: return wrap(n.lhs, 4, true) + "^" + format_number(n.value);
    case Kind::Call: return std::string(func_name(n.func)) + "(" + n.lhs.to_string() + ")";
  }
  return {};
}

Expr parse_expression(std::string_view src, int dim) {
  if (dim < 1) throw InputError("expression dimension must be positive");
  return Parser(src, dim).parse();
}

Expr differentiate(const Expr& e, int var) {
  if (var < 1) throw InputError("derivative variable index must be >= 1");
  return e.derivative(var);
}

double evaluate(const Expr& e, std::span<const double> coords) { return e.evaluate(coords); }

}  // namespace bmcd
