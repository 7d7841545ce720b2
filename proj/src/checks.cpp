#include "hftlab/checks.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hftlab {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

struct AdaptedContext {
  HermitianMatrix H;
  HermitianMatrix dH;
  SpectralDecomposition plain;
  RotationResult rot;
};

AdaptedContext adapted_at(const ModelDefinition& m, double lambda,
                          double tol_deg) {
  HermitianMatrix H = evaluate_matrix(m.hamiltonian(), lambda);
  HermitianMatrix dH = evaluate_derivative(m.hamiltonian(), lambda);
  SpectralDecomposition d = eigendecompose(H, lambda);
  const double tol = resolve_degeneracy_tolerance(H, tol_deg);
  RotationResult rot = rotate_within_clusters(d, dH, cluster_degeneracies(d, tol));
  return {std::move(H), std::move(dH), std::move(d), std::move(rot)};
}

const DegenerateCluster& matching_cluster(const RotationResult& rot,
                                          const DegenerateCluster& wanted,
                                          double lambda) {
  for (const auto& c : rot.partition.clusters) {
    if (c.start == wanted.start && c.size == wanted.size) {
      if (!c.degenerate()) break;
      return c;
    }
  }
  std::ostringstream os;
  os << "levels " << wanted.start << ".." << wanted.start + wanted.size - 1
     << " do not form a degenerate cluster at lambda = " << lambda;
  throw std::invalid_argument(os.str());
}

}  // namespace

double resolve_degeneracy_tolerance(const HermitianMatrix& h, double tol_deg) {
  return tol_deg > 0.0 ? tol_deg : default_degeneracy_tolerance(h);
}

ResidualReport check_diagonal_hft(const ModelDefinition& m, double lambda,
                                  double tol_deg, const FDConfig& fd) {
  const AdaptedContext ctx = adapted_at(m, lambda, tol_deg);
  const BranchSlopes oracle = fd_branch_slopes(
      m.hamiltonian(), lambda, ctx.rot.adapted.eigenvectors, fd);

  double slope_defect = 0.0;
  int worst = 0;
  for (int k = 0; k < ctx.rot.slopes.size(); ++k) {
    const double diff = std::abs(ctx.rot.slopes[k] - oracle.slopes[k]);
    if (diff > slope_defect) {
      slope_defect = diff;
      worst = k;
    }
  }

  // Within each cluster the adapted basis must also kill the off-diagonal
  // elements of dH.
  double offdiag_defect = 0.0;
  for (const auto& c : ctx.rot.partition.clusters) {
    if (!c.degenerate()) continue;
    const auto vc = ctx.rot.adapted.eigenvectors.middleCols(c.start, c.size);
    const Eigen::MatrixXcd b = vc.adjoint() * ctx.dH.mat() * vc;
    for (int i = 0; i < c.size; ++i) {
      for (int j = 0; j < c.size; ++j) {
        if (i != j) offdiag_defect = std::max(offdiag_defect, std::abs(b(i, j)));
      }
    }
  }

  std::vector<std::string> notes;
  notes.push_back("levels = " + num(ctx.rot.slopes.size()) + ", worst level " +
                  num(worst) + ", fd step = " + num(oracle.step_used));
  notes.push_back("in-cluster off-diagonal defect = " + num(offdiag_defect));
  if (ctx.rot.residual_degeneracy) {
    notes.push_back(
        "projected derivative degenerate within a cluster (basis not fixed "
        "at first order)");
  }
  double residual = std::max(slope_defect, offdiag_defect);
  if (!oracle.reliable) {
    double omin = 1.0;
    for (double o : oracle.overlaps) omin = std::min(omin, o);
    notes.push_back("branch matching unreliable (min overlap " + num(omin) +
                    "), slopes not certified");
    residual = std::nan("");
  }
  return make_report("diagonal_hft", lambda, residual, tol::diagonal_hft,
                     std::move(notes), "adapted-basis diag of dH",
                     "fd branch slopes");
}

ResidualReport check_unitary_mix(const ModelDefinition& m, double lambda,
                                 const Eigen::MatrixXcd& mix,
                                 const DegenerateCluster& cluster,
                                 double tol_deg) {
  const AdaptedContext ctx = adapted_at(m, lambda, tol_deg);
  const DegenerateCluster& c = matching_cluster(ctx.rot, cluster, lambda);
  if (mix.rows() != c.size || mix.cols() != c.size) {
    std::ostringstream os;
    os << "mix must be " << c.size << "x" << c.size
       << " for this cluster, got " << mix.rows() << "x" << mix.cols();
    throw std::invalid_argument(os.str());
  }
  const double unitarity_defect = max_abs(
      (mix.adjoint() * mix - Eigen::MatrixXcd::Identity(c.size, c.size))
          .eval());
  if (unitarity_defect > tol::mix_unitarity) {
    std::ostringstream os;
    os << "mix is not unitary (defect " << unitarity_defect << ")";
    throw std::invalid_argument(os.str());
  }

  const auto vc = ctx.rot.adapted.eigenvectors.middleCols(c.start, c.size);
  const Eigen::MatrixXcd chi = vc * mix;
  const Eigen::MatrixXcd lhs = chi.adjoint() * ctx.dH.mat() * chi;
  const Eigen::MatrixXcd rhs =
      mix.adjoint() *
      ctx.rot.slopes.segment(c.start, c.size).asDiagonal().toDenseMatrix() *
      mix;
  const double residual = max_abs(lhs - rhs);

  std::vector<std::string> notes;
  notes.push_back("cluster levels " + num(c.start) + ".." +
                  num(c.start + c.size - 1) + " (E = " +
                  num(ctx.plain.eigenvalues[c.start]) + ")");
  notes.push_back("unitarity defect = " + num(unitarity_defect));
  return make_report("unitary_mix", lambda, residual, tol::unitary_mix,
                     std::move(notes), "dH in mixed basis",
                     "mix^* diag(slopes) mix");
}

ResidualReport check_sum_rule(const ModelDefinition& m, double lambda0,
                              const DegenerateCluster& cluster, int trials,
                              std::mt19937_64& rng, double tol_deg,
                              const FDConfig& fd) {
  if (trials < 1) throw std::invalid_argument("sum rule needs trials >= 1");
  const AdaptedContext ctx = adapted_at(m, lambda0, tol_deg);
  const DegenerateCluster& c = matching_cluster(ctx.rot, cluster, lambda0);
  const auto vc = ctx.rot.adapted.eigenvectors.middleCols(c.start, c.size);

  const double trace_adapted = ctx.rot.slopes.segment(c.start, c.size).sum();
  double spread = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::MatrixXcd u = random_unitary(c.size, rng);
    const Eigen::MatrixXcd chi = vc * u;
    double tr = 0.0;
    for (int i = 0; i < c.size; ++i) {
      tr += (chi.col(i).adjoint() * ctx.dH.mat() * chi.col(i))(0, 0).real();
    }
    spread = std::max(spread, std::abs(tr - trace_adapted));
  }

  const BranchSlopes oracle = fd_branch_slopes(
      m.hamiltonian(), lambda0, ctx.rot.adapted.eigenvectors, fd);
  double fd_sum = 0.0;
  for (int k = c.start; k < c.start + c.size; ++k) fd_sum += oracle.slopes[k];
  const double deviation = std::abs(trace_adapted - fd_sum);

  double residual = std::max(spread, deviation);
  std::vector<std::string> notes;
  notes.push_back("cluster levels " + num(c.start) + ".." +
                  num(c.start + c.size - 1) + ", trials = " + num(trials));
  notes.push_back(
      "basis spread = " + num(spread) + " (bound " +
      num(tol::sum_rule_spread_scale * (1.0 + ctx.dH.max_abs_entry())) + ")");
  notes.push_back("fd deviation = " + num(deviation));
  if (!oracle.reliable) {
    notes.push_back("branch matching unreliable, sum not certified");
    residual = std::nan("");
  }
  return make_report("sum_rule", lambda0, residual, tol::sum_rule,
                     std::move(notes), "cluster trace of dH (any mix)",
                     "sum of fd branch slopes");
}

ResidualReport check_offdiag_hft(const ModelDefinition& m, double lambda,
                                 double tol_deg, const FDConfig& fd) {
  const HermitianMatrix H = evaluate_matrix(m.hamiltonian(), lambda);
  const HermitianMatrix dH = evaluate_derivative(m.hamiltonian(), lambda);
  const SpectralDecomposition d = eigendecompose(H, lambda);
  const double tol = resolve_degeneracy_tolerance(H, tol_deg);
  const DegeneracyPartition p = cluster_degeneracies(d, tol);
  for (const auto& c : p.clusters) {
    if (c.degenerate()) {
      std::ostringstream os;
      os << "spectrum is degenerate at lambda = " << lambda << " (levels "
         << c.start << ".." << c.start + c.size - 1 << " within " << tol
         << "); the off-diagonal relation assumes distinct energies -- "
            "evaluate away from the degeneracy, where the degenerate-cluster "
            "checks take over";
      throw std::invalid_argument(os.str());
    }
  }

  const Eigen::MatrixXcd dv = fd_eigenvector_derivative(
      m.hamiltonian(), lambda, d.eigenvectors, d.eigenvalues, fd);
  const Eigen::MatrixXcd c_fd = d.eigenvectors.adjoint() * dv;
  const BranchSlopes slope_oracle =
      fd_branch_slopes(m.hamiltonian(), lambda, d.eigenvectors, fd);
  const Eigen::MatrixXcd dh_eig =
      d.eigenvectors.adjoint() * dH.mat() * d.eigenvectors;

  double residual = 0.0;
  int wn = 0, wm = 0;
  const int n = d.dim();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      cplx rhs = (d.eigenvalues[b] - d.eigenvalues[a]) * c_fd(a, b);
      if (a == b) rhs += slope_oracle.slopes[a];
      const double diff = std::abs(dh_eig(a, b) - rhs);
      if (diff > residual) {
        residual = diff;
        wn = a;
        wm = b;
      }
    }
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k < n; ++k) {
    min_gap = std::min(min_gap, d.eigenvalues[k] - d.eigenvalues[k - 1]);
  }
  std::vector<std::string> notes;
  notes.push_back("pairs = " + num(n * n) + ", worst (" + num(wn) + "," +
                  num(wm) + ")");
  notes.push_back("min gap = " + num(min_gap));
  return make_report("offdiag_hft", lambda, residual, tol::offdiag_hft,
                     std::move(notes), "<psi_n|dH|psi_m>",
                     "(E_m-E_n)<psi_n|d psi_m> + slope_n delta");
}

ResidualReport check_hypervirial(const HermitianMatrix& h,
                                 const HermitianMatrix& w,
                                 const SpectralDecomposition& d,
                                 const DegeneracyPartition& p,
                                 const std::string& w_label) {
  if (w.dim() != h.dim() || d.dim() != h.dim()) {
    throw std::invalid_argument("hypervirial: dimension mismatch");
  }
  const Eigen::MatrixXcd comm = h.mat() * w.mat() - w.mat() * h.mat();
  const double c_norm = max_abs(comm);
  const double c_bound = comm.norm();  // Frobenius, bounds every element in any basis
  const Eigen::MatrixXcd wb =
      d.eigenvectors.adjoint() * w.mat() * d.eigenvectors;
  const Eigen::MatrixXcd lb =
      d.eigenvectors.adjoint() * comm * d.eigenvectors;

  const double noise = tol::commutator_noise_scale *
                       (1.0 + h.max_abs_entry() * w.max_abs_entry());
  const bool commuting = c_norm <= noise;

  // Identity defect, informational: <i|[H,W]|j> - (E_i - E_j) W_ij.
  double identity_defect = 0.0;
  const int n = d.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx expected = (d.eigenvalues[i] - d.eigenvalues[j]) * wb(i, j);
      identity_defect = std::max(identity_defect,
                                 std::abs(lb(i, j) - expected));
    }
  }

  // Cross-cluster bound on W elements.
  double residual = 0.0;
  double cross_max = 0.0;
  for (std::size_t a = 0; a < p.clusters.size(); ++a) {
    for (std::size_t b = 0; b < p.clusters.size(); ++b) {
      if (a == b) continue;
      const auto& ca = p.clusters[a];
      const auto& cb = p.clusters[b];
      for (int i = ca.start; i < ca.start + ca.size; ++i) {
        for (int j = cb.start; j < cb.start + cb.size; ++j) {
          const double wij = std::abs(wb(i, j));
          cross_max = std::max(cross_max, wij);
          if (commuting) {
            residual = std::max(residual, wij);
          } else {
            const double gap = std::abs(d.eigenvalues[i] - d.eigenvalues[j]);
            residual =
                std::max(residual, wij - (c_bound + noise) / gap);
          }
        }
      }
    }
  }
  residual = std::max(residual, 0.0);

  const double tolerance =
      tol::hypervirial_scale * (1.0 + w.max_abs_entry());
  std::vector<std::string> notes;
  notes.push_back("W = " + w_label);
  notes.push_back("max |[H,W]| = " + num(c_norm) +
                  (commuting ? " (commuting)" : " (non-commuting)"));
  notes.push_back("max cross-cluster |W_ij| = " + num(cross_max));
  notes.push_back("identity defect = " + num(identity_defect));
  return make_report("hypervirial", d.lambda, residual, tolerance,
                     std::move(notes), "cross-cluster |W_ij|",
                     commuting ? "0" : "(||[H,W]||_F + noise)/|E_i - E_j|");
}

ResidualReport check_hypervirial(const ModelDefinition& m, double lambda,
                                 const HermitianMatrix& w,
                                 const std::string& w_label, double tol_deg) {
  const HermitianMatrix H = evaluate_matrix(m.hamiltonian(), lambda);
  const SpectralDecomposition d = eigendecompose(H, lambda);
  const DegeneracyPartition p =
      cluster_degeneracies(d, resolve_degeneracy_tolerance(H, tol_deg));
  return check_hypervirial(H, w, d, p, w_label);
}

}  // namespace hftlab
