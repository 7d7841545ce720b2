#include "hftlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hftlab {

namespace {

/// Rotate each column so its largest-modulus component is real positive.
void fix_phases(Eigen::MatrixXcd& v) {
  for (int j = 0; j < v.cols(); ++j) {
    int imax = 0;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    const cplx pivot = v(imax, j);
    const double mag = std::abs(pivot);
    if (mag > 0.0) v.col(j) *= std::conj(pivot) / mag;
  }
}

double real_ipow(double x, long p) {
  if (p == 0) return 1.0;
  if (p < 0) {
    if (x == 0.0) throw EvalError("0 raised to a negative power");
    return 1.0 / real_ipow(x, -p);
  }
  double acc = 1.0;
  double base = x;
  long e = p;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

}  // namespace

SpectralDecomposition eigendecompose(const HermitianMatrix& h,
                                     double lambda) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.mat());
  if (solver.info() != Eigen::Success) {
    throw EvalError("eigendecomposition did not converge");
  }
  SpectralDecomposition d;
  d.lambda = lambda;
  d.eigenvalues = solver.eigenvalues();
  d.eigenvectors = solver.eigenvectors();
  fix_phases(d.eigenvectors);
  return d;
}

double default_degeneracy_tolerance(const HermitianMatrix& h) {
  return 1e-8 * std::max(1.0, h.max_abs_entry());
}

const DegenerateCluster& DegeneracyPartition::cluster_of(int index) const {
  for (const auto& c : clusters) {
    if (c.contains(index)) return c;
  }
  throw EvalError("cluster_of: index outside the partition");
}

bool DegeneracyPartition::any_degenerate() const {
  for (const auto& c : clusters) {
    if (c.degenerate()) return true;
  }
  return false;
}

int DegeneracyPartition::max_multiplicity() const {
  int g = 0;
  for (const auto& c : clusters) g = std::max(g, c.size);
  return g;
}

std::vector<DegenerateCluster> cluster_degeneracies(
    const Eigen::VectorXd& eigenvalues_ascending, double tol) {
  std::vector<DegenerateCluster> clusters;
  const int n = static_cast<int>(eigenvalues_ascending.size());
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n &&
           eigenvalues_ascending[end] - eigenvalues_ascending[start] <= tol) {
      ++end;
    }
    clusters.push_back({start, end - start});
    start = end;
  }
  return clusters;
}

DegeneracyPartition cluster_degeneracies(const SpectralDecomposition& d,
                                         double tol) {
  DegeneracyPartition p;
  p.tolerance = tol;
  p.clusters = cluster_degeneracies(d.eigenvalues, tol);
  return p;
}

RotationResult rotate_within_clusters(const SpectralDecomposition& d,
                                      const HermitianMatrix& dh,
                                      const DegeneracyPartition& p) {
  if (dh.dim() != d.dim()) {
    throw EvalError("rotate_within_clusters: dimension mismatch");
  }
  RotationResult r;
  r.adapted = d;
  r.slopes = Eigen::VectorXd::Zero(d.dim());
  r.partition = p;
  const Eigen::MatrixXcd& dm = dh.mat();
  for (const auto& c : p.clusters) {
    if (!c.degenerate()) {
      const auto v = d.eigenvectors.col(c.start);
      r.slopes[c.start] = (v.adjoint() * dm * v)(0, 0).real();
      continue;
    }
    const auto vc = d.eigenvectors.middleCols(c.start, c.size);
    Eigen::MatrixXcd b = vc.adjoint() * dm * vc;
    b = 0.5 * (b + b.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(b);
    if (solver.info() != Eigen::Success) {
      throw EvalError("projected-derivative diagonalization did not converge");
    }
    r.adapted.eigenvectors.middleCols(c.start, c.size) =
        vc * solver.eigenvectors();
    r.slopes.segment(c.start, c.size) = solver.eigenvalues();
    for (int k = 1; k < c.size; ++k) {
      if (solver.eigenvalues()[k] - solver.eigenvalues()[k - 1] <=
          p.tolerance) {
        r.residual_degeneracy = true;
      }
    }
  }
  fix_phases(r.adapted.eigenvectors);
  return r;
}

AlignmentResult align_to_basis(const Eigen::MatrixXcd& reference,
                               const SpectralDecomposition& fresh) {
  const int n = static_cast<int>(reference.cols());
  if (fresh.dim() != n || reference.rows() != fresh.eigenvectors.rows()) {
    throw EvalError("align_to_basis: dimension mismatch");
  }
  const Eigen::MatrixXcd inner = reference.adjoint() * fresh.eigenvectors;
  const Eigen::MatrixXd overlap = inner.cwiseAbs();

  AlignmentResult a;
  a.aligned.lambda = fresh.lambda;
  a.aligned.eigenvalues = Eigen::VectorXd::Zero(n);
  a.aligned.eigenvectors = Eigen::MatrixXcd::Zero(reference.rows(), n);
  a.overlaps.assign(n, 0.0);
  a.permutation.assign(n, -1);

  // Greedy global assignment: repeatedly take the largest remaining overlap.
  std::vector<bool> row_used(n, false), col_used(n, false);
  for (int pick = 0; pick < n; ++pick) {
    int bi = -1, bj = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (col_used[j]) continue;
        if (overlap(i, j) > best) {
          best = overlap(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = true;
    col_used[bj] = true;
    a.permutation[bi] = bj;
    a.overlaps[bi] = best;
    a.aligned.eigenvalues[bi] = fresh.eigenvalues[bj];
    Eigen::VectorXcd col = fresh.eigenvectors.col(bj);
    const cplx ip = inner(bi, bj);
    const double mag = std::abs(ip);
    if (mag > 0.0) col *= std::conj(ip) / mag;
    a.aligned.eigenvectors.col(bi) = col;
  }
  for (double o : a.overlaps) {
    if (o < kContinuationOverlapThreshold) a.reliable = false;
  }
  return a;
}

AlignmentResult align_continuation(const SpectralDecomposition& prev,
                                   const SpectralDecomposition& next) {
  return align_to_basis(prev.eigenvectors, next);
}

MatrixFunctionSpec MatrixFunctionSpec::boltzmann(double beta) {
  if (!(beta > 0.0)) {
    std::ostringstream os;
    os << "boltzmann weight requires beta > 0, got " << beta;
    throw EvalError(os.str());
  }
  MatrixFunctionSpec s;
  s.kind_ = Kind::Boltzmann;
  s.beta_ = beta;
  return s;
}

MatrixFunctionSpec MatrixFunctionSpec::power(long p) {
  MatrixFunctionSpec s;
  s.kind_ = Kind::Power;
  s.power_ = p;
  return s;
}

MatrixFunctionSpec MatrixFunctionSpec::polynomial(std::vector<double> coeffs) {
  MatrixFunctionSpec s;
  s.kind_ = Kind::Polynomial;
  s.coeffs_ = std::move(coeffs);
  if (s.coeffs_.empty()) s.coeffs_.push_back(0.0);
  return s;
}

MatrixFunctionSpec MatrixFunctionSpec::identity() {
  MatrixFunctionSpec s;
  s.kind_ = Kind::Identity;
  return s;
}

double MatrixFunctionSpec::apply(double x) const {
  switch (kind_) {
    case Kind::Boltzmann:
      return std::exp(-beta_ * x);
    case Kind::Power:
      return real_ipow(x, power_);
    case Kind::Polynomial: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * x + *it;
      }
      return acc;
    }
    case Kind::Identity:
      return x;
  }
  return 0.0;
}

bool MatrixFunctionSpec::has_antiderivative() const {
  return !(kind_ == Kind::Power && power_ == -1);
}

double MatrixFunctionSpec::antiderivative(double x) const {
  switch (kind_) {
    case Kind::Boltzmann:
      return -std::exp(-beta_ * x) / beta_;
    case Kind::Power:
      if (power_ == -1) {
        throw EvalError("power(-1) has no polynomial antiderivative");
      }
      return real_ipow(x, power_ + 1) / static_cast<double>(power_ + 1);
    case Kind::Polynomial: {
      double acc = 0.0;
      for (std::size_t k = coeffs_.size(); k-- > 0;) {
        acc = acc * x + coeffs_[k] / static_cast<double>(k + 1);
      }
      return acc * x;
    }
    case Kind::Identity:
      return 0.5 * x * x;
  }
  return 0.0;
}

double MatrixFunctionSpec::log_scale_for(
    const Eigen::VectorXd& eigenvalues) const {
  if (kind_ != Kind::Boltzmann || eigenvalues.size() == 0) return 0.0;
  return -beta_ * eigenvalues.minCoeff();
}

double MatrixFunctionSpec::apply_scaled(double x, double log_scale) const {
  if (kind_ == Kind::Boltzmann) return std::exp(-beta_ * x - log_scale);
  return apply(x);  // non-boltzmann specs always use log_scale 0
}

std::string MatrixFunctionSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Boltzmann:
      os << "boltzmann(beta=" << beta_ << ")";
      break;
    case Kind::Power:
      os << "power(" << power_ << ")";
      break;
    case Kind::Polynomial: {
      os << "polynomial(";
      for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        if (k) os << ",";
        os << coeffs_[k];
      }
      os << ")";
      break;
    }
    case Kind::Identity:
      os << "identity";
      break;
  }
  return os.str();
}

ScaledMatrix matrix_function(const SpectralDecomposition& d,
                             const MatrixFunctionSpec& f) {
  ScaledMatrix out;
  out.log_scale = f.log_scale_for(d.eigenvalues);
  Eigen::VectorXd fe(d.dim());
  for (int k = 0; k < d.dim(); ++k) {
    fe[k] = f.apply_scaled(d.eigenvalues[k], out.log_scale);
  }
  out.matrix = d.eigenvectors * fe.asDiagonal() * d.eigenvectors.adjoint();
  return out;
}

Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      g(i, j) = cplx(gauss(rng), gauss(rng));
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const cplx rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return q;
}

}  // namespace hftlab
