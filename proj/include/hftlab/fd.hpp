#pragma once

#include <functional>
#include <optional>

#include "hftlab/model.hpp"
#include "hftlab/spectral.hpp"

namespace hftlab {

/// Step policy for central differences. With richardson (default) the
/// four-point estimate (4 D_{h/2} - D_h) / 3 is used, accurate to O(h^4).
struct FDConfig {
  std::optional<double> step;  // absolute step; default scales with lambda
  bool richardson = true;

  double step_for(double lambda) const {
    return step ? *step : 1e-5 * std::max(1.0, std::abs(lambda));
  }
};

/// Central-difference derivative of a scalar function. A symmetric stencil
/// straddling a kink (e.g. |x| at 0) returns the average of the one-sided
/// slopes without warning; smoothness is the caller's obligation.
double fd_scalar(const std::function<double(double)>& f, double lambda,
                 const FDConfig& cfg = {});

/// Finite-difference slopes of the eigenvalue branches passing through the
/// columns of a chosen basis at lambda. Side spectra are matched to the basis
/// by overlap, so slopes follow branches through crossings instead of the
/// sorted order. A column counts as reliably matched if either its direct
/// overlap with the matched side vector is >= 1/sqrt(2), or at least half its
/// mass falls inside the matched side vector's degenerate cluster (side
/// eigenvalues within a cluster agree, so in-cluster mixing cannot change the
/// slope). If any column fails, the whole computation is retried once with a
/// tenth of the step before giving up.
struct BranchSlopes {
  Eigen::VectorXd slopes;
  std::vector<double> overlaps;  // worst effective overlap per column
  bool reliable = true;
  double step_used = 0.0;
};

BranchSlopes fd_branch_slopes(const MatrixFamily& h, double lambda,
                              const Eigen::MatrixXcd& basis,
                              const FDConfig& cfg = {});

/// Same, with the reference basis built internally: eigendecompose H(lambda)
/// and rotate degenerate clusters against dH (tolerance tol_deg; <= 0 means
/// the default scale-aware tolerance). Slopes are listed in the rotated
/// basis's order.
BranchSlopes fd_branch_slopes(const ModelDefinition& m, double lambda,
                              const FDConfig& cfg = {}, double tol_deg = 0.0);

/// Finite-difference derivative of the eigenvectors themselves, in the gauge
/// where the side vectors have real positive inner product with the center
/// basis. Requires a safely nondegenerate spectrum: every consecutive gap at
/// lambda must exceed 100 * step * max|dH|; otherwise the basis rotates too
/// fast for the stencil and EvalError explains which gap failed.
Eigen::MatrixXcd fd_eigenvector_derivative(const MatrixFamily& h,
                                           double lambda,
                                           const Eigen::MatrixXcd& basis,
                                           const Eigen::VectorXd& values,
                                           const FDConfig& cfg = {});

Eigen::MatrixXcd fd_eigenvector_derivative(const ModelDefinition& m,
                                           double lambda,
                                           const FDConfig& cfg = {});

}  // namespace hftlab
