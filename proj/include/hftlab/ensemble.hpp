#pragma once

#include <optional>
#include <string>

#include "hftlab/checks.hpp"
#include "hftlab/fd.hpp"
#include "hftlab/model.hpp"
#include "hftlab/report.hpp"
#include "hftlab/spectral.hpp"

namespace hftlab {

namespace tol {
inline constexpr double weighted_trace_scale = 1e-9;  // * (1+max|W| max|dH|)
inline constexpr double function_trace_rel = 1e-6;    // relative, three-way
inline constexpr double free_energy_rel = 1e-6;       // relative, three-way
inline constexpr double observable_scale = 1e-8;      // * (1 + leg magnitude)
inline constexpr double observable_diag_scale = 1e-8;  // * (1 + max|dA|)
}  // namespace tol

/// How a statistical weight is applied to a trace.
enum class Normalization { Raw, UnitTrace };

/// A weight f(H) together with its normalization convention. The normalized
/// form divides by the partition sum tr f(H), which must be positive.
struct EnsembleSpec {
  MatrixFunctionSpec weight = MatrixFunctionSpec::identity();
  Normalization normalization = Normalization::Raw;
};

/// Two or three independently computed values of the same derivative:
/// `direct` via full-matrix traces, `spectral` via eigenvalue sums in the
/// adapted basis, `oracle` via a finite difference of an antiderivative
/// (absent when no closed-form antiderivative exists). `residual` is the
/// largest pairwise disagreement among the defined legs; `scale` is the
/// magnitude used to build a relative tolerance.
struct TraceComparison {
  double direct = 0.0;
  double spectral = 0.0;
  std::optional<double> oracle;
  double residual = 0.0;
  double scale = 1.0;
  std::vector<std::string> notes;
};

/// tr(W dH) against sum_n <chi_n|W|chi_n> * slope_n in the dH-adapted basis.
/// The identity holds when W commutes with H; the commutation defect is
/// measured and recorded, not assumed. The oracle leg differentiates
/// lambda -> tr(W H(lambda)) for the constant matrix W.
TraceComparison trace_weighted_derivative(const ModelDefinition& m,
                                          double lambda,
                                          const HermitianMatrix& w,
                                          double tol_deg,
                                          const FDConfig& fd = {});

/// tr(f(H) dH) against sum_n f(E_n) * slope_n, with a third leg
/// differentiating lambda -> sum_n F(E_n) for the antiderivative F of f.
TraceComparison function_trace_derivative(const ModelDefinition& m,
                                          double lambda,
                                          const MatrixFunctionSpec& f,
                                          double tol_deg,
                                          const FDConfig& fd = {});

/// Canonical free energy F = -ln(sum_n exp(-beta E_n))/beta, computed with
/// the max-shift so large beta stays representable. dF/dlambda is compared
/// three ways: normalized Boltzmann trace, probability-weighted slope sum,
/// and a finite difference of F itself (step widened when |F| is so large
/// that cancellation would dominate the default step).
TraceComparison free_energy_derivative(const ModelDefinition& m, double beta,
                                       double lambda, double tol_deg,
                                       const FDConfig& fd = {});

/// Generic form behind the two above, honoring the requested normalization.
/// Raw: direct = tr(f(H) dH); normalized: direct = tr(f(H) dH)/tr f(H).
/// The oracle leg exists for raw weights with an antiderivative and for the
/// normalized Boltzmann weight (the free energy); otherwise it is omitted
/// with a note.
TraceComparison ensemble_trace_derivative(const ModelDefinition& m,
                                          double lambda,
                                          const EnsembleSpec& spec,
                                          double tol_deg,
                                          const FDConfig& fd = {});

/// tr(W dA) against sum_n <psi_n|W|psi_n> * da_n/dlambda for a model
/// observable A sharing H's eigenbasis. `condition_ok` reports the measurable
/// validity condition: inside every degenerate cluster, both A and dA must be
/// diagonal in the dH-adapted basis; when it fails, `condition_notes` names
/// the offending cluster and the derived report must fail.
struct ObservableResult {
  TraceComparison comparison;
  bool condition_ok = true;
  std::vector<std::string> condition_notes;
};

/// Throws std::invalid_argument if the model has no matrix "A" or if
/// [H, A] != 0 beyond measurement noise at this lambda.
ObservableResult observable_trace_derivative(const ModelDefinition& m,
                                             double lambda,
                                             const HermitianMatrix& w,
                                             double tol_deg,
                                             const FDConfig& fd = {});

/// Fold a TraceComparison into a pass/fail report with tolerance
/// rel_tol * scale. A failed validity condition is reported as a
/// non-finite residual so the report can never pass.
ResidualReport to_report(const std::string& name, double lambda,
                         const TraceComparison& c, double rel_tol,
                         bool force_fail = false);

}  // namespace hftlab
