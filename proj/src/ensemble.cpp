#include "hftlab/ensemble.hpp"

#include <algorithm>
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

double re_trace_prod(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a * b).trace().real();
}

double pairwise_residual(double a, double b,
                         const std::optional<double>& c) {
  double r = std::abs(a - b);
  if (c) {
    r = std::max(r, std::abs(a - *c));
    r = std::max(r, std::abs(b - *c));
  }
  return r;
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
  RotationResult rot =
      rotate_within_clusters(d, dH, cluster_degeneracies(d, tol));
  return {std::move(H), std::move(dH), std::move(d), std::move(rot)};
}

Eigen::VectorXd spectrum_at(const MatrixFamily& h, double x) {
  return eigendecompose(evaluate_matrix(h, x), x).eigenvalues;
}

/// F(lambda) = -ln(sum_n exp(-beta E_n))/beta via the max-shift.
double free_energy_value(const MatrixFamily& h, double beta, double x) {
  const Eigen::VectorXd e = spectrum_at(h, x);
  const double emin = e.minCoeff();
  double z = 0.0;
  for (int k = 0; k < e.size(); ++k) z += std::exp(-beta * (e[k] - emin));
  return emin - std::log(z) / beta;
}

}  // namespace

ResidualReport to_report(const std::string& name, double lambda,
                         const TraceComparison& c, double rel_tol,
                         bool force_fail) {
  std::string lhs = "direct = " + num(c.direct);
  std::string rhs = "spectral = " + num(c.spectral);
  if (c.oracle) rhs += ", oracle = " + num(*c.oracle);
  const double residual = force_fail ? std::nan("") : c.residual;
  return make_report(name, lambda, residual, rel_tol * c.scale, c.notes,
                     std::move(lhs), std::move(rhs));
}

TraceComparison trace_weighted_derivative(const ModelDefinition& m,
                                          double lambda,
                                          const HermitianMatrix& w,
                                          double tol_deg,
                                          const FDConfig& fd) {
  const AdaptedContext ctx = adapted_at(m, lambda, tol_deg);
  if (w.dim() != ctx.H.dim()) {
    throw std::invalid_argument("trace_weighted_derivative: W dimension");
  }
  TraceComparison out;
  out.direct = re_trace_prod(w.mat(), ctx.dH.mat());

  double spectral = 0.0;
  for (int k = 0; k < ctx.rot.slopes.size(); ++k) {
    const auto chi = ctx.rot.adapted.eigenvectors.col(k);
    spectral +=
        (chi.adjoint() * w.mat() * chi)(0, 0).real() * ctx.rot.slopes[k];
  }
  out.spectral = spectral;

  const MatrixFamily& h = m.hamiltonian();
  out.oracle = fd_scalar(
      [&](double x) {
        return re_trace_prod(w.mat(), evaluate_matrix(h, x).mat());
      },
      lambda, fd);

  const double comm = max_abs(
      (ctx.H.mat() * w.mat() - w.mat() * ctx.H.mat()).eval());
  const double noise = tol::commutator_noise_scale *
                       (1.0 + ctx.H.max_abs_entry() * w.max_abs_entry());
  out.notes.push_back("max |[H,W]| = " + num(comm) +
                      (comm <= noise ? " (commuting)" : " (non-commuting)"));
  out.scale = 1.0 + w.max_abs_entry() * ctx.dH.max_abs_entry();
  out.residual = pairwise_residual(out.direct, out.spectral, out.oracle);
  return out;
}

TraceComparison ensemble_trace_derivative(const ModelDefinition& m,
                                          double lambda,
                                          const EnsembleSpec& spec,
                                          double tol_deg,
                                          const FDConfig& fd) {
  const AdaptedContext ctx = adapted_at(m, lambda, tol_deg);
  const MatrixFamily& h = m.hamiltonian();
  const MatrixFunctionSpec& f = spec.weight;

  const ScaledMatrix fh = matrix_function(ctx.rot.adapted, f);
  const double num_scaled = re_trace_prod(fh.matrix, ctx.dH.mat());
  const double den_scaled = fh.matrix.trace().real();

  double sum_f_slope_scaled = 0.0;
  double sum_f_scaled = 0.0;
  for (int k = 0; k < ctx.rot.slopes.size(); ++k) {
    const double fe =
        f.apply_scaled(ctx.plain.eigenvalues[k], fh.log_scale);
    sum_f_slope_scaled += fe * ctx.rot.slopes[k];
    sum_f_scaled += fe;
  }

  TraceComparison out;
  if (spec.normalization == Normalization::Raw) {
    const double factor = std::exp(fh.log_scale);
    if (!std::isfinite(factor)) {
      throw EvalError(
          "raw weighted trace overflows at this beta; use the normalized "
          "(free-energy) form instead");
    }
    out.direct = factor * num_scaled;
    out.spectral = factor * sum_f_slope_scaled;
    if (f.has_antiderivative()) {
      out.oracle = fd_scalar(
          [&](double x) {
            const Eigen::VectorXd e = spectrum_at(h, x);
            double acc = 0.0;
            for (int k = 0; k < e.size(); ++k) acc += f.antiderivative(e[k]);
            return acc;
          },
          lambda, fd);
      out.notes.push_back("oracle = fd of the antiderivative trace");
    } else {
      out.notes.push_back(
          "no closed-form antiderivative for " + f.describe() +
          "; oracle leg omitted");
    }
  } else {
    if (!(den_scaled > 0.0)) {
      throw EvalError("normalized weight needs a positive partition sum");
    }
    out.direct = num_scaled / den_scaled;
    out.spectral = sum_f_slope_scaled / sum_f_scaled;
    if (f.is_boltzmann()) {
      const double beta = f.beta();
      const double f0 = free_energy_value(h, beta, lambda);
      // Widen the step when |F| is large enough that subtractive
      // cancellation at the default step would dominate the estimate.
      FDConfig wide = fd;
      const double h_cancel = std::cbrt(
          3.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0)));
      const double h_default = fd.step_for(lambda);
      if (h_cancel > h_default) {
        wide.step = h_cancel;
        out.notes.push_back("fd step widened to " + num(h_cancel) +
                            " (|F| = " + num(std::abs(f0)) + ")");
      }
      out.oracle = fd_scalar(
          [&](double x) { return free_energy_value(h, beta, x); }, lambda,
          wide);
      out.notes.push_back("F = " + num(f0) +
                          ", log scale = " + num(fh.log_scale));
    } else {
      out.notes.push_back(
          "normalized " + f.describe() +
          " has no antiderivative oracle; leg omitted");
    }
  }
  out.notes.insert(out.notes.begin(), "weight = " + f.describe());
  double magnitude = std::max(std::abs(out.direct), std::abs(out.spectral));
  if (out.oracle) magnitude = std::max(magnitude, std::abs(*out.oracle));
  out.scale = 1.0 + magnitude;
  out.residual = pairwise_residual(out.direct, out.spectral, out.oracle);
  return out;
}

TraceComparison function_trace_derivative(const ModelDefinition& m,
                                          double lambda,
                                          const MatrixFunctionSpec& f,
                                          double tol_deg,
                                          const FDConfig& fd) {
  return ensemble_trace_derivative(
      m, lambda, {f, Normalization::Raw}, tol_deg, fd);
}

TraceComparison free_energy_derivative(const ModelDefinition& m, double beta,
                                       double lambda, double tol_deg,
                                       const FDConfig& fd) {
  return ensemble_trace_derivative(
      m, lambda, {MatrixFunctionSpec::boltzmann(beta),
                  Normalization::UnitTrace},
      tol_deg, fd);
}

ObservableResult observable_trace_derivative(const ModelDefinition& m,
                                             double lambda,
                                             const HermitianMatrix& w,
                                             double tol_deg,
                                             const FDConfig& fd) {
  const MatrixFamily* a_fam = m.find("A");
  if (!a_fam) {
    throw std::invalid_argument(
        "observable check needs a matrix named 'A' in the model");
  }
  const AdaptedContext ctx = adapted_at(m, lambda, tol_deg);
  const HermitianMatrix A = evaluate_matrix(*a_fam, lambda);
  const HermitianMatrix dA = evaluate_derivative(*a_fam, lambda);
  if (w.dim() != ctx.H.dim()) {
    throw std::invalid_argument("observable_trace_derivative: W dimension");
  }

  const double comm =
      max_abs((ctx.H.mat() * A.mat() - A.mat() * ctx.H.mat()).eval());
  const double comm_tol =
      1e-10 * (1.0 + ctx.H.max_abs_entry() * A.max_abs_entry());
  if (comm > comm_tol) {
    std::ostringstream os;
    os << "A does not commute with H at lambda = " << lambda
       << " (max |[H,A]| = " << comm << " > " << comm_tol
       << "); the observable identity assumes a shared eigenbasis";
    throw std::invalid_argument(os.str());
  }

  ObservableResult res;
  // Validity condition: inside every degenerate cluster, the dH-adapted
  // basis must diagonalize both A and dA.
  const double tau_a =
      tol::observable_diag_scale * (1.0 + A.max_abs_entry());
  const double tau_da =
      tol::observable_diag_scale * (1.0 + dA.max_abs_entry());
  for (const auto& c : ctx.rot.partition.clusters) {
    if (!c.degenerate()) continue;
    const auto vc = ctx.rot.adapted.eigenvectors.middleCols(c.start, c.size);
    const Eigen::MatrixXcd ab = vc.adjoint() * A.mat() * vc;
    const Eigen::MatrixXcd dab = vc.adjoint() * dA.mat() * vc;
    double def_a = 0.0, def_da = 0.0;
    for (int i = 0; i < c.size; ++i) {
      for (int j = 0; j < c.size; ++j) {
        if (i == j) continue;
        def_a = std::max(def_a, std::abs(ab(i, j)));
        def_da = std::max(def_da, std::abs(dab(i, j)));
      }
    }
    const std::string where = "cluster levels " + num(c.start) + ".." +
                              num(c.start + c.size - 1) + " (E = " +
                              num(ctx.plain.eigenvalues[c.start]) + ")";
    if (def_a > tau_a) {
      res.condition_ok = false;
      res.condition_notes.push_back(
          "validity condition violated in " + where +
          ": A is not diagonal in the adapted basis (off-diagonal " +
          num(def_a) + ")");
    }
    if (def_da > tau_da) {
      res.condition_ok = false;
      res.condition_notes.push_back(
          "validity condition violated in " + where +
          ": the derivative of A is not diagonal in the adapted basis "
          "(off-diagonal " + num(def_da) + ")");
    }
  }

  TraceComparison& c = res.comparison;
  c.direct = re_trace_prod(w.mat(), dA.mat());
  double spectral = 0.0;
  for (int k = 0; k < ctx.rot.slopes.size(); ++k) {
    const auto chi = ctx.rot.adapted.eigenvectors.col(k);
    const double wn = (chi.adjoint() * w.mat() * chi)(0, 0).real();
    const double dan = (chi.adjoint() * dA.mat() * chi)(0, 0).real();
    spectral += wn * dan;
  }
  c.spectral = spectral;
  c.oracle = fd_scalar(
      [&](double x) {
        return re_trace_prod(w.mat(), evaluate_matrix(*a_fam, x).mat());
      },
      lambda, fd);
  c.notes.push_back("max |[H,A]| = " + num(comm));
  double magnitude = std::max(std::abs(c.direct), std::abs(c.spectral));
  if (c.oracle) magnitude = std::max(magnitude, std::abs(*c.oracle));
  c.scale = 1.0 + magnitude;
  c.residual = pairwise_residual(c.direct, c.spectral, c.oracle);
  c.notes.insert(c.notes.end(), res.condition_notes.begin(),
                 res.condition_notes.end());
  return res;
}

}  // namespace hftlab
