#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "hftlab/hermitian.hpp"

namespace hftlab {

/// Full eigendecomposition of a Hermitian matrix at one lambda: eigenvalues
/// ascending, eigenvector columns orthonormal, each column phase-fixed so its
/// largest-modulus component is real positive. After align_continuation the
/// columns follow reference branches instead, so eigenvalues may then be
/// listed out of ascending order.
struct SpectralDecomposition {
  double lambda = 0.0;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;  // column n pairs with eigenvalues[n]

  int dim() const { return static_cast<int>(eigenvalues.size()); }
};

SpectralDecomposition eigendecompose(const HermitianMatrix& h,
                                     double lambda = 0.0);

/// Degeneracy threshold that scales with the matrix: 1e-8 * max(1, max|H_ij|).
double default_degeneracy_tolerance(const HermitianMatrix& h);

/// A maximal run of (near-)equal eigenvalues in the ascending spectrum;
/// size 1 means nondegenerate.
struct DegenerateCluster {
  int start = 0;
  int size = 1;
  bool degenerate() const { return size > 1; }
  bool contains(int index) const {
    return index >= start && index < start + size;
  }
};

/// Partition of the ascending spectrum into clusters, with the tolerance it
/// was built at. Clusters are disjoint, ordered, and cover every index.
struct DegeneracyPartition {
  std::vector<DegenerateCluster> clusters;
  double tolerance = 0.0;

  const DegenerateCluster& cluster_of(int index) const;
  bool any_degenerate() const;
  int max_multiplicity() const;
};

/// Greedy left-to-right clustering: an eigenvalue joins the current cluster
/// while it lies within tol of the cluster's first member (anchoring to the
/// first member prevents chains of small gaps from merging well-separated
/// levels).
DegeneracyPartition cluster_degeneracies(const SpectralDecomposition& d,
                                         double tol);
std::vector<DegenerateCluster> cluster_degeneracies(
    const Eigen::VectorXd& eigenvalues_ascending, double tol);

/// Eigenbasis adapted to a perturbation direction. Within each degenerate
/// cluster the basis diagonalizes the projected derivative V_c^* dH V_c, so
/// every column has a well-defined energy slope; nondegenerate columns are
/// untouched and their slope is the diagonal expectation value. In-cluster
/// columns are ordered by ascending slope.
struct RotationResult {
  SpectralDecomposition adapted;  // eigenvalues unchanged, vectors rotated
  Eigen::VectorXd slopes;         // dE_n/dlambda per column
  DegeneracyPartition partition;
  /// True if some cluster's projected derivative has slope gaps at or below
  /// the partition tolerance: first order does not single out a basis and the
  /// returned in-cluster directions are determined only up to further mixing.
  bool residual_degeneracy = false;
};

RotationResult rotate_within_clusters(const SpectralDecomposition& d,
                                      const HermitianMatrix& dh,
                                      const DegeneracyPartition& p);

/// Match a freshly computed decomposition to a reference basis from a nearby
/// lambda: permute columns by greedy maximum overlap, then fix each phase so
/// <ref_k, v_k> is real positive. Eigenvalues are carried through the same
/// permutation, so the output follows branches rather than the sorted order.
struct AlignmentResult {
  SpectralDecomposition aligned;
  std::vector<double> overlaps;  // |<ref_k, v_k>| per column
  std::vector<int> permutation;  // output column k is input column perm[k]
  bool reliable = true;          // min overlap >= 1/sqrt(2)
};

AlignmentResult align_continuation(const SpectralDecomposition& prev,
                                   const SpectralDecomposition& next);
AlignmentResult align_to_basis(const Eigen::MatrixXcd& reference,
                               const SpectralDecomposition& fresh);

inline constexpr double kContinuationOverlapThreshold =
    0.70710678118654752;  // 1/sqrt(2)

/// Scalar function to be lifted to a Hermitian matrix through its spectrum.
class MatrixFunctionSpec {
 public:
  static MatrixFunctionSpec boltzmann(double beta);  // x -> exp(-beta x)
  static MatrixFunctionSpec power(long p);           // x -> x^p
  static MatrixFunctionSpec polynomial(
      std::vector<double> coeffs);                   // coeffs[k] * x^k
  static MatrixFunctionSpec identity();              // x -> x

  /// f(x) at natural scale (may overflow for large beta * |x|).
  double apply(double x) const;

  /// True when a closed-form antiderivative F with F' = f is available
  /// (everything except power(-1)).
  bool has_antiderivative() const;
  double antiderivative(double x) const;

  /// log of the internal scale factor used by matrix_function for this spec
  /// at the given spectrum: -beta * E_min for boltzmann, else 0.
  double log_scale_for(const Eigen::VectorXd& eigenvalues) const;
  /// f(x) divided by exp(log_scale): safe at large beta.
  double apply_scaled(double x, double log_scale) const;

  bool is_boltzmann() const { return kind_ == Kind::Boltzmann; }
  double beta() const { return beta_; }
  std::string describe() const;

 private:
  enum class Kind { Boltzmann, Power, Polynomial, Identity };
  MatrixFunctionSpec() = default;
  Kind kind_ = Kind::Identity;
  double beta_ = 0.0;
  long power_ = 0;
  std::vector<double> coeffs_;
};

/// f(H) = exp(log_scale) * matrix. The split keeps Boltzmann factors
/// representable at large beta; absolute() recombines (and may overflow --
/// callers of normalized quantities should stay in the scaled form).
struct ScaledMatrix {
  Eigen::MatrixXcd matrix;
  double log_scale = 0.0;
  Eigen::MatrixXcd absolute() const { return std::exp(log_scale) * matrix; }
};

ScaledMatrix matrix_function(const SpectralDecomposition& d,
                             const MatrixFunctionSpec& f);

/// Haar-distributed n x n unitary (QR of a complex Ginibre sample with the
/// usual phase correction).
Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng);

}  // namespace hftlab
