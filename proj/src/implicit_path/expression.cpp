#include "gvf3d/expression.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <charconv>
#include <optional>
#include <utility>

namespace gvf3d {

Expression Expression::literal(double v) {
  Expression e;
  e.kind = Kind::Number;
  e.number = v;
  return e;
}

Expression Expression::var(int axis) {
  Expression e;
  e.kind = Kind::Variable;
  e.variable = axis;
  return e;
}

Expression Expression::unary(Kind k, Expression operand) {
  Expression e;
  e.kind = k;
  e.children.push_back(std::move(operand));
  return e;
}

Expression Expression::binary(Kind k, Expression lhs, Expression rhs) {
  Expression e;
  e.kind = k;
  e.children.push_back(std::move(lhs));
  e.children.push_back(std::move(rhs));
  return e;
}

Expression Expression::power(Expression base, int exponent) {
  Expression e;
  e.kind = Kind::Pow;
  e.exponent = exponent;
  e.children.push_back(std::move(base));
  return e;
}

Expression Expression::call(Function f, Expression arg) {
  Expression e;
  e.kind = Kind::Call;
  e.function = f;
  e.children.push_back(std::move(arg));
  return e;
}

const char* function_name(Expression::Function f) {
  switch (f) {
    case Expression::Function::Sin: return "sin";
    case Expression::Function::Cos: return "cos";
    case Expression::Function::Tan: return "tan";
    case Expression::Function::Exp: return "exp";
    case Expression::Function::Ln: return "ln";
    case Expression::Function::Sqrt: return "sqrt";
  }
  return "?";
}

ParseError::ParseError(Reason reason, std::size_t offset, std::string message, std::vector<std::string> expected)
    : std::runtime_error("at offset " + std::to_string(offset) + ": " + message),
      reason_(reason),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

constexpr std::array<std::pair<const char*, Expression::Function>, 6> kFunctions{{
    {"sin", Expression::Function::Sin},
    {"cos", Expression::Function::Cos},
    {"tan", Expression::Function::Tan},
    {"exp", Expression::Function::Exp},
    {"ln", Expression::Function::Ln},
    {"sqrt", Expression::Function::Sqrt},
}};

// Identifiers that name real functions which fail to be C^2 somewhere on R^3.
constexpr std::array<const char*, 12> kNonSmooth{
    "abs", "fabs", "min", "max", "sign", "sgn", "floor", "ceil", "round", "step", "heaviside", "mod"};

std::vector<std::string> atom_starts() {
  std::vector<std::string> v{"number", "x", "y", "z"};
  for (const auto& [name, f] : kFunctions) v.emplace_back(name);
  v.emplace_back("(");
  return v;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expression parse() {
    Expression e = expr();
    skip_ws();
    if (pos_ < src_.size()) {
      std::vector<std::string> expected{"+", "-", "*", "/"};
      if (!last_factor_had_power_) expected.emplace_back("^");
      expected.emplace_back("end of input");
      throw ParseError(ParseError::Reason::Syntax, pos_,
                       "unexpected '" + std::string(1, src_[pos_]) + "'", std::move(expected));
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail_expected(std::vector<std::string> expected) {
    skip_ws();
    std::string what = pos_ < src_.size() ? "unexpected '" + std::string(1, src_[pos_]) + "'"
                                          : std::string("unexpected end of input");
    throw ParseError(ParseError::Reason::Syntax, pos_, std::move(what), std::move(expected));
  }

  Expression expr() {
    Expression lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expression::binary(Expression::Kind::Add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = Expression::binary(Expression::Kind::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  Expression term() {
    Expression lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = Expression::binary(Expression::Kind::Mul, std::move(lhs), factor());
      } else if (accept('/')) {
        lhs = Expression::binary(Expression::Kind::Div, std::move(lhs), factor());
      } else {
        return lhs;
      }
    }
  }

  Expression factor() {
    const bool negate = accept('-');
    Expression base = atom();
    last_factor_had_power_ = false;
    if (accept('^')) {
      base = Expression::power(std::move(base), integer_exponent());
      last_factor_had_power_ = true;
    }
    if (negate) return Expression::unary(Expression::Kind::Neg, std::move(base));
    return base;
  }

  int integer_exponent() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      if (pos_ < src_.size() && src_[pos_] == '-')
        throw ParseError(ParseError::Reason::NonSmooth, pos_,
                         "negative exponents are not allowed; write a division instead", {"integer"});
      fail_expected({"integer"});
    }
    std::size_t end = pos_;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    if (end < src_.size() && (src_[end] == '.' || src_[end] == 'e' || src_[end] == 'E'))
      throw ParseError(ParseError::Reason::NonSmooth, start,
                       "exponent must be a non-negative integer (fractional powers are not C^2)");
    int value = 0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + end, value);
    if (ec != std::errc{} || ptr != src_.data() + end)
      throw ParseError(ParseError::Reason::Syntax, start, "exponent out of range", {"integer"});
    pos_ = end;
    return value;
  }

  Expression atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail_expected(atom_starts());
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ++depth_;
      Expression inner = expr();
      if (!accept(')')) fail_expected({"+", "-", "*", "/", ")"});
      --depth_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail_expected(atom_starts());
  }

  Expression number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t k = end + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
        end = k;
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + end, value);
    if (ec != std::errc{} || ptr != src_.data() + end)
      throw ParseError(ParseError::Reason::Syntax, start, "malformed number", {"number"});
    pos_ = end;
    return Expression::literal(value);
  }

  Expression identifier() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) ++end;
    const std::string_view name = src_.substr(start, end - start);
    pos_ = end;
    if (name == "x") return Expression::var(0);
    if (name == "y") return Expression::var(1);
    if (name == "z") return Expression::var(2);
    for (const auto& [fname, f] : kFunctions) {
      if (name == fname) {
        if (!accept('(')) fail_expected({"("});
        ++depth_;
        Expression arg = expr();
        if (!accept(')')) fail_expected({"+", "-", "*", "/", ")"});
        --depth_;
        return Expression::call(f, std::move(arg));
      }
    }
    for (const char* bad : kNonSmooth) {
      if (name == bad)
        throw ParseError(ParseError::Reason::NonSmooth, start,
                         "'" + std::string(name) + "' is not twice continuously differentiable");
    }
    throw ParseError(ParseError::Reason::UnknownIdentifier, start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  bool last_factor_had_power_ = false;
};

int precedence(const Expression& e) {
  switch (e.kind) {
    case Expression::Kind::Add:
    case Expression::Kind::Sub: return 1;
    case Expression::Kind::Mul:
    case Expression::Kind::Div: return 2;
    case Expression::Kind::Neg: return 3;
    default: return 4;
  }
}

bool is_atom(const Expression& e) {
  return e.kind == Expression::Kind::Number || e.kind == Expression::Kind::Variable ||
         e.kind == Expression::Kind::Call;
}

void render(const Expression& e, std::string& out);

void render_wrapped(const Expression& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  render(e, out);
  if (wrap) out += ')';
}

void render(const Expression& e, std::string& out) {
  using K = Expression::Kind;
  switch (e.kind) {
    case K::Number: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof(buf), e.number);
      const bool negative = e.number < 0 || (e.number == 0 && std::signbit(e.number));
      if (negative) out += '(';
      out.append(buf, res.ptr);
      if (negative) out += ')';
      return;
    }
    case K::Variable: out += "xyz"[e.variable]; return;
    case K::Call:
      out += function_name(e.function);
      out += '(';
      render(e.children[0], out);
      out += ')';
      return;
    case K::Pow:
      render_wrapped(e.children[0], !is_atom(e.children[0]), out);
      out += '^';
      out += std::to_string(e.exponent);
      return;
    case K::Neg: {
      const Expression& c = e.children[0];
      out += '-';
      render_wrapped(c, !(is_atom(c) || c.kind == K::Pow), out);
      return;
    }
    case K::Add:
    case K::Sub:
    case K::Mul:
    case K::Div: {
      const int p = precedence(e);
      render_wrapped(e.children[0], precedence(e.children[0]) < p, out);
      out += e.kind == K::Add ? " + " : e.kind == K::Sub ? " - " : e.kind == K::Mul ? " * " : " / ";
      render_wrapped(e.children[1], precedence(e.children[1]) <= p, out);
      return;
    }
  }
}

}  // namespace

Expression parse_expression(std::string_view source) { return Parser(source).parse(); }

std::string to_string(const Expression& e) {
  std::string out;
  render(e, out);
  return out;
}

}  // namespace gvf3d
