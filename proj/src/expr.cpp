#include "hftlab/expr.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace hftlab {

struct Expr::Node {
  Kind kind;
  cplx value{0.0, 0.0};  // Constant
  long expo = 0;         // Pow
  Func fn = Func::Sin;   // Call
  Expr a;                // unary argument / lhs / pow base
  Expr b;                // rhs
};

namespace {

// Integer power by repeated squaring. Exact for real inputs, unlike
// std::pow(complex, double) which goes through exp/log and leaves
// imaginary dirt on the negative real axis.
cplx ipow(cplx base, long n) {
  if (n == 0) return {1.0, 0.0};
  const bool neg = n < 0;
  unsigned long k = neg ? static_cast<unsigned long>(-(n + 1)) + 1UL
                        : static_cast<unsigned long>(n);
  cplx acc{1.0, 0.0};
  cplx b = base;
  for (; k != 0; k >>= 1) {
    if (k & 1UL) acc *= b;
    b *= b;
  }
  if (neg) {
    if (acc == cplx{0.0, 0.0}) throw EvalError("zero raised to a negative power");
    return cplx{1.0, 0.0} / acc;
  }
  return acc;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Render a complex constant so that the model grammar reads it back.
std::string format_cplx(cplx v) {
  if (v.imag() == 0.0) return format_double(v.real());
  std::string im = format_double(std::abs(v.imag())) + "*i";
  if (v.real() == 0.0) return v.imag() < 0.0 ? "-" + im : im;
  return "(" + format_double(v.real()) + (v.imag() < 0.0 ? "-" : "+") + im + ")";
}

}  // namespace

Expr Expr::constant(cplx value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::parameter() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Parameter;
  return Expr(std::move(n));
}

Expr Expr::negate(Expr e) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->a = std::move(e);
  return Expr(std::move(n));
}

#define HFTLAB_BINARY(NAME, KIND)                \
  Expr Expr::NAME(Expr lhs, Expr rhs) {          \
    auto n = std::make_shared<Node>();           \
    n->kind = Kind::KIND;                        \
    n->a = std::move(lhs);                       \
    n->b = std::move(rhs);                       \
    return Expr(std::move(n));                   \
  }

HFTLAB_BINARY(add, Add)
HFTLAB_BINARY(sub, Sub)
HFTLAB_BINARY(mul, Mul)
HFTLAB_BINARY(div, Div)
#undef HFTLAB_BINARY

Expr Expr::pow(Expr base, long exponent) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pow;
  n->a = std::move(base);
  n->expo = exponent;
  return Expr(std::move(n));
}

Expr Expr::call(Func f, Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->fn = f;
  n->a = std::move(arg);
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
cplx Expr::constant_value() const { return node_->value; }
long Expr::exponent() const { return node_->expo; }
Expr::Func Expr::func() const { return node_->fn; }
const Expr& Expr::left() const { return node_->a; }
const Expr& Expr::right() const { return node_->b; }

cplx Expr::evaluate(double lambda) const {
  const Node& n = *node_;
  cplx r;
  switch (n.kind) {
    case Kind::Constant: return n.value;
    case Kind::Parameter: return {lambda, 0.0};
    case Kind::Negate: return -n.a.evaluate(lambda);
    case Kind::Add: r = n.a.evaluate(lambda) + n.b.evaluate(lambda); break;
    case Kind::Sub: r = n.a.evaluate(lambda) - n.b.evaluate(lambda); break;
    case Kind::Mul: r = n.a.evaluate(lambda) * n.b.evaluate(lambda); break;
    case Kind::Div: {
      cplx den = n.b.evaluate(lambda);
      if (den == cplx{0.0, 0.0})
        throw EvalError("division by zero at lambda = " + format_double(lambda));
      r = n.a.evaluate(lambda) / den;
      break;
    }
    case Kind::Pow: r = ipow(n.a.evaluate(lambda), n.expo); break;
    case Kind::Call: {
      cplx x = n.a.evaluate(lambda);
      switch (n.fn) {
        case Func::Sin: r = std::sin(x); break;
        case Func::Cos: r = std::cos(x); break;
        case Func::Exp: r = std::exp(x); break;
        case Func::Sqrt: r = std::sqrt(x); break;
        case Func::Ln:
          if (x == cplx{0.0, 0.0})
            throw EvalError("ln(0) at lambda = " + format_double(lambda));
          r = std::log(x);
          break;
      }
      break;
    }
  }
  if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
    throw EvalError("non-finite value at lambda = " + format_double(lambda));
  return r;
}

Expr Expr::derivative() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant: return constant({0.0, 0.0});
    case Kind::Parameter: return constant({1.0, 0.0});
    case Kind::Negate: return negate(n.a.derivative());
    case Kind::Add: return add(n.a.derivative(), n.b.derivative());
    case Kind::Sub: return sub(n.a.derivative(), n.b.derivative());
    case Kind::Mul:
      return add(mul(n.a.derivative(), n.b), mul(n.a, n.b.derivative()));
    case Kind::Div:
      // (a'b - ab') / b^2
      return div(sub(mul(n.a.derivative(), n.b), mul(n.a, n.b.derivative())),
                 pow(n.b, 2));
    case Kind::Pow:
      if (n.expo == 0) return constant({0.0, 0.0});
      return mul(constant({static_cast<double>(n.expo), 0.0}),
                 mul(pow(n.a, n.expo - 1), n.a.derivative()));
    case Kind::Call: {
      Expr inner = n.a.derivative();
      switch (n.fn) {
        case Func::Sin: return mul(call(Func::Cos, n.a), inner);
        case Func::Cos: return negate(mul(call(Func::Sin, n.a), inner));
        case Func::Exp: return mul(call(Func::Exp, n.a), inner);
        case Func::Sqrt:
          // f' / (2 sqrt(f))
          return div(inner, mul(constant({2.0, 0.0}), call(Func::Sqrt, n.a)));
        case Func::Ln: return div(inner, n.a);
      }
      break;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant: return format_cplx(n.value);
    case Kind::Parameter: return "lambda";
    case Kind::Negate: return "-(" + n.a.to_string() + ")";
    case Kind::Add: return "(" + n.a.to_string() + "+" + n.b.to_string() + ")";
    case Kind::Sub: return "(" + n.a.to_string() + "-" + n.b.to_string() + ")";
    case Kind::Mul: return "(" + n.a.to_string() + "*" + n.b.to_string() + ")";
    case Kind::Div: return "(" + n.a.to_string() + "/" + n.b.to_string() + ")";
    case Kind::Pow:
      return "(" + n.a.to_string() + ")^" + std::to_string(n.expo);
    case Kind::Call: return func_name(n.fn) + "(" + n.a.to_string() + ")";
  }
  return "?";
}

std::string func_name(Expr::Func f) {
  switch (f) {
    case Expr::Func::Sin: return "sin";
    case Expr::Func::Cos: return "cos";
    case Expr::Func::Exp: return "exp";
    case Expr::Func::Sqrt: return "sqrt";
    case Expr::Func::Ln: return "ln";
  }
  return "?";
}

}  // namespace hftlab
