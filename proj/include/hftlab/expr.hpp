#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>

namespace hftlab {

using cplx = std::complex<double>;

/// Runtime evaluation failure: division by zero, log of zero, non-finite
/// result, or a matrix-level constraint violated at a concrete lambda.
struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Immutable scalar expression in one real parameter ("lambda") with complex
/// constants. Subtrees are shared; nodes are never mutated after construction,
/// so expressions may be evaluated concurrently.
class Expr {
 public:
  enum class Kind { Constant, Parameter, Negate, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Exp, Sqrt, Ln };

  Expr() = default;

  static Expr constant(cplx value);
  static Expr parameter();
  static Expr negate(Expr e);
  static Expr add(Expr lhs, Expr rhs);
  static Expr sub(Expr lhs, Expr rhs);
  static Expr mul(Expr lhs, Expr rhs);
  static Expr div(Expr lhs, Expr rhs);
  // Exponent is restricted to integer constants; this keeps differentiation
  // total. Fractional powers are written via exp/ln or sqrt.
  static Expr pow(Expr base, long exponent);
  static Expr call(Func f, Expr arg);

  bool valid() const { return node_ != nullptr; }

  Kind kind() const;
  cplx constant_value() const;  // Constant only
  long exponent() const;        // Pow only
  Func func() const;            // Call only
  const Expr& left() const;     // first child (unary argument, lhs, pow base)
  const Expr& right() const;    // second child (rhs)

  cplx evaluate(double lambda) const;

  /// d/dlambda by the usual sum/product/quotient/chain/integer-power rules.
  /// No simplification beyond dropping trivially zero-producing branches.
  Expr derivative() const;

  /// Re-parseable rendering (used in diagnostics and round-trip tests).
  std::string to_string() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

std::string func_name(Expr::Func f);

}  // namespace hftlab
