#pragma once

#include <Eigen/Dense>
#include <tuple>
#include <vector>

#include "hftlab/expr.hpp"

namespace hftlab {

/// Entrywise max modulus; 0 for an empty matrix.
double max_abs(const Eigen::MatrixXcd& m);

/// Dense Hermitian matrix. Hermiticity is exact by construction: only the
/// upper triangle is independent, the lower triangle mirrors it under
/// conjugation and the diagonal is stored with zero imaginary part.
class HermitianMatrix {
 public:
  static HermitianMatrix zero(int n);
  static HermitianMatrix identity(int n);

  /// Assemble from 0-based upper-triangle entries (i <= j). Diagonal entries
  /// must already be exactly real; unspecified entries are zero.
  static HermitianMatrix from_upper(
      int n, const std::vector<std::tuple<int, int, cplx>>& entries);

  /// Canonicalize a computed matrix that is Hermitian up to roundoff. Throws
  /// EvalError if the Hermiticity defect exceeds tol * (1 + max_abs).
  static HermitianMatrix from_dense(const Eigen::MatrixXcd& m,
                                    double tol = 1e-10);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& mat() const { return m_; }
  double max_abs_entry() const { return max_abs(m_); }

 private:
  explicit HermitianMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {}
  Eigen::MatrixXcd m_;
};

}  // namespace hftlab
