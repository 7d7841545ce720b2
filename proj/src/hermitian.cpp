#include "hftlab/hermitian.hpp"

#include <cmath>
#include <sstream>

namespace hftlab {

double max_abs(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

HermitianMatrix HermitianMatrix::zero(int n) {
  return HermitianMatrix(Eigen::MatrixXcd::Zero(n, n));
}

HermitianMatrix HermitianMatrix::identity(int n) {
  return HermitianMatrix(Eigen::MatrixXcd::Identity(n, n));
}

HermitianMatrix HermitianMatrix::from_upper(
    int n, const std::vector<std::tuple<int, int, cplx>>& entries) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [i, j, v] : entries) {
    if (i < 0 || j < 0 || i >= n || j >= n || i > j) {
      std::ostringstream os;
      os << "entry (" << i << "," << j << ") outside upper triangle of "
         << n << "x" << n << " matrix";
      throw EvalError(os.str());
    }
    if (i == j) {
      if (v.imag() != 0.0) {
        std::ostringstream os;
        os << "diagonal entry (" << i << "," << i
           << ") has nonzero imaginary part " << v.imag();
        throw EvalError(os.str());
      }
      m(i, i) = cplx(v.real(), 0.0);
    } else {
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }
  return HermitianMatrix(std::move(m));
}

HermitianMatrix HermitianMatrix::from_dense(const Eigen::MatrixXcd& m,
                                            double tol) {
  if (m.rows() != m.cols()) throw EvalError("from_dense: matrix not square");
  const double defect = max_abs(m - m.adjoint());
  const double scale = 1.0 + max_abs(m);
  if (defect > tol * scale) {
    std::ostringstream os;
    os << "from_dense: Hermiticity defect " << defect << " exceeds "
       << tol * scale;
    throw EvalError(os.str());
  }
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = cplx(m(i, i).real(), 0.0);
    for (int j = i + 1; j < n; ++j) {
      const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  return HermitianMatrix(std::move(h));
}

}  // namespace hftlab
