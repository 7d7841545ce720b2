#include "hftlab/fd.hpp"

#include <cmath>
#include <sstream>

namespace hftlab {

namespace {

double central(const std::function<double(double)>& f, double lambda,
               double h) {
  return (f(lambda + h) - f(lambda - h)) / (2.0 * h);
}

/// Alignment of one side point, with the cluster-mass fallback for columns
/// landing in a degenerate side cluster (see fd.hpp).
struct SideMatch {
  Eigen::VectorXd values;         // per center column, branch-matched
  std::vector<double> effective;  // effective overlap per center column
};

SideMatch match_side(const HermitianMatrix& hm, double side_lambda,
                     const Eigen::MatrixXcd& basis) {
  const SpectralDecomposition d = eigendecompose(hm, side_lambda);
  const AlignmentResult a = align_to_basis(basis, d);
  SideMatch m;
  m.values = a.aligned.eigenvalues;
  m.effective.assign(a.overlaps.begin(), a.overlaps.end());
  if (a.reliable) return m;

  const auto clusters =
      cluster_degeneracies(d.eigenvalues, default_degeneracy_tolerance(hm));
  const int n = d.dim();
  for (int k = 0; k < n; ++k) {
    if (m.effective[k] >= kContinuationOverlapThreshold) continue;
    const int j = a.permutation[k];
    for (const auto& c : clusters) {
      if (!c.contains(j)) continue;
      double mass = 0.0;
      for (int t = c.start; t < c.start + c.size; ++t) {
        mass +=
            std::norm((basis.col(k).adjoint() * d.eigenvectors.col(t))(0, 0));
      }
      m.effective[k] = std::max(m.effective[k], std::sqrt(mass));
      break;
    }
  }
  return m;
}

BranchSlopes branch_slopes_at_step(const MatrixFamily& h, double lambda,
                                   const Eigen::MatrixXcd& basis, double step,
                                   bool richardson) {
  const int n = static_cast<int>(basis.cols());
  BranchSlopes r;
  r.step_used = step;
  r.overlaps.assign(n, 1.0);
  const auto slopes_for = [&](double s) {
    const SideMatch plus =
        match_side(evaluate_matrix(h, lambda + s), lambda + s, basis);
    const SideMatch minus =
        match_side(evaluate_matrix(h, lambda - s), lambda - s, basis);
    for (int k = 0; k < n; ++k) {
      r.overlaps[k] = std::min(
          r.overlaps[k], std::min(plus.effective[k], minus.effective[k]));
    }
    return ((plus.values - minus.values) / (2.0 * s)).eval();
  };
  if (richardson) {
    const Eigen::VectorXd dh = slopes_for(step);
    const Eigen::VectorXd dh2 = slopes_for(step / 2.0);
    r.slopes = (4.0 * dh2 - dh) / 3.0;
  } else {
    r.slopes = slopes_for(step);
  }
  for (double o : r.overlaps) {
    if (o < kContinuationOverlapThreshold) r.reliable = false;
  }
  return r;
}

}  // namespace

double fd_scalar(const std::function<double(double)>& f, double lambda,
                 const FDConfig& cfg) {
  const double h = cfg.step_for(lambda);
  const double dh = central(f, lambda, h);
  if (!cfg.richardson) return dh;
  const double dh2 = central(f, lambda, h / 2.0);
  return (4.0 * dh2 - dh) / 3.0;
}

BranchSlopes fd_branch_slopes(const MatrixFamily& h, double lambda,
                              const Eigen::MatrixXcd& basis,
                              const FDConfig& cfg) {
  const double step = cfg.step_for(lambda);
  BranchSlopes first =
      branch_slopes_at_step(h, lambda, basis, step, cfg.richardson);
  if (first.reliable) return first;
  BranchSlopes retry =
      branch_slopes_at_step(h, lambda, basis, step / 10.0, cfg.richardson);
  return retry.reliable ? retry : first;
}

BranchSlopes fd_branch_slopes(const ModelDefinition& m, double lambda,
                              const FDConfig& cfg, double tol_deg) {
  const MatrixFamily& h = m.hamiltonian();
  const HermitianMatrix H = evaluate_matrix(h, lambda);
  const HermitianMatrix dH = evaluate_derivative(h, lambda);
  const SpectralDecomposition d = eigendecompose(H, lambda);
  const double tol =
      tol_deg > 0.0 ? tol_deg : default_degeneracy_tolerance(H);
  const RotationResult rot =
      rotate_within_clusters(d, dH, cluster_degeneracies(d, tol));
  return fd_branch_slopes(h, lambda, rot.adapted.eigenvectors, cfg);
}

Eigen::MatrixXcd fd_eigenvector_derivative(const MatrixFamily& h,
                                           double lambda,
                                           const Eigen::MatrixXcd& basis,
                                           const Eigen::VectorXd& values,
                                           const FDConfig& cfg) {
  const double step = cfg.step_for(lambda);
  const int n = static_cast<int>(basis.cols());
  const double dh_norm = evaluate_derivative(h, lambda).max_abs_entry();

  for (int k = 1; k < n; ++k) {
    const double gap = values[k] - values[k - 1];
    const double need = 100.0 * step * dh_norm;
    if (gap <= need) {
      std::ostringstream os;
      os << "eigenvector derivative ill-conditioned at lambda = " << lambda
         << ": gap " << gap << " between levels " << (k - 1) << " and " << k
         << " is not above " << need
         << " (100 * step * max|dH|); evaluate away from the degeneracy or "
            "use the degenerate-cluster checks";
      throw EvalError(os.str());
    }
  }

  const auto aligned_side = [&](double x) {
    const SpectralDecomposition d = eigendecompose(evaluate_matrix(h, x), x);
    const AlignmentResult a = align_to_basis(basis, d);
    if (!a.reliable) {
      throw EvalError(
          "eigenvector derivative: side basis could not be matched to the "
          "center basis (step too large for this spectrum)");
    }
    return a.aligned.eigenvectors;
  };

  const auto diff_at = [&](double s) {
    const Eigen::MatrixXcd vp = aligned_side(lambda + s);
    const Eigen::MatrixXcd vm = aligned_side(lambda - s);
    return ((vp - vm) / (2.0 * s)).eval();
  };

  const Eigen::MatrixXcd dv = diff_at(step);
  if (!cfg.richardson) return dv;
  const Eigen::MatrixXcd dv2 = diff_at(step / 2.0);
  return (4.0 * dv2 - dv) / 3.0;
}

Eigen::MatrixXcd fd_eigenvector_derivative(const ModelDefinition& m,
                                           double lambda,
                                           const FDConfig& cfg) {
  const MatrixFamily& h = m.hamiltonian();
  const SpectralDecomposition d =
      eigendecompose(evaluate_matrix(h, lambda), lambda);
  return fd_eigenvector_derivative(h, lambda, d.eigenvectors, d.eigenvalues,
                                   cfg);
}

}  // namespace hftlab
