#pragma once

#include <random>
#include <string>

#include "hftlab/fd.hpp"
#include "hftlab/model.hpp"
#include "hftlab/report.hpp"
#include "hftlab/spectral.hpp"

namespace hftlab {

/// Tolerances pinned for the residual checks, in one place. Scale-suffixed
/// values multiply (1 + the named norm product).
namespace tol {
inline constexpr double diagonal_hft = 1e-6;
inline constexpr double unitary_mix = 1e-8;
inline constexpr double sum_rule = 1e-6;
inline constexpr double sum_rule_spread_scale = 1e-10;   // * (1 + max|dH|)
inline constexpr double offdiag_hft = 1e-5;
inline constexpr double hypervirial_scale = 1e-10;       // * (1 + max|W|)
inline constexpr double commutator_noise_scale = 1e-12;  // * (1+max|H|max|W|)
inline constexpr double mix_unitarity = 1e-12;
}  // namespace tol

/// Resolve a degeneracy tolerance argument: values <= 0 select the
/// scale-aware default for this matrix.
double resolve_degeneracy_tolerance(const HermitianMatrix& h, double tol_deg);

/// dE_n/dlambda == <chi_n| dH |chi_n> for every level, in the basis adapted
/// to dH within degenerate clusters, AND <chi_i| dH |chi_j> == 0 for i != j
/// inside each cluster. The slopes' oracle is an independent
/// finite-difference slope of each eigenvalue branch; the reported residual
/// is the worse of the two defects.
ResidualReport check_diagonal_hft(const ModelDefinition& m, double lambda,
                                  double tol_deg, const FDConfig& fd = {});

/// For an arbitrary unitary mix chi = V_c * mix of a degenerate cluster's
/// adapted basis, <chi_i| dH |chi_j> must equal (mix^* diag(slopes) mix)_ij.
/// Throws std::invalid_argument if `cluster` does not coincide with a
/// degenerate cluster at this lambda, or if mix is not unitary (defect above
/// tol::mix_unitarity) of the cluster's size.
ResidualReport check_unitary_mix(const ModelDefinition& m, double lambda,
                                 const Eigen::MatrixXcd& mix,
                                 const DegenerateCluster& cluster,
                                 double tol_deg);

/// The summed slope of a degenerate cluster is basis independent: over
/// `trials` random unitary mixes, sum_i <chi_i|dH|chi_i> must not move
/// (spread), and must agree with the finite-difference sum of the branch
/// slopes (deviation). The reported residual is max(spread, deviation); the
/// notes carry both, with the much stricter spread bound.
ResidualReport check_sum_rule(const ModelDefinition& m, double lambda0,
                              const DegenerateCluster& cluster, int trials,
                              std::mt19937_64& rng, double tol_deg,
                              const FDConfig& fd = {});

/// Full element-wise relation at a nondegenerate lambda:
/// <psi_n|dH|psi_m> = (E_m - E_n) <psi_n|d psi_m/d lambda> + slope_n delta_nm
/// with the eigenvector derivative and the diagonal slopes both taken from
/// independent finite differences. Throws std::invalid_argument when the
/// spectrum is degenerate at tol_deg (use the degenerate-cluster checks at
/// such points instead).
ResidualReport check_offdiag_hft(const ModelDefinition& m, double lambda,
                                 double tol_deg, const FDConfig& fd = {});

/// Hypervirial-derived bound: since <psi_i|[H,W]|psi_j> = (E_i - E_j) W_ij,
/// every cross-cluster element obeys |W_ij| <= (max|[H,W]| + noise)/|E_i-E_j|.
/// The residual is the worst violation of that bound; when [H,W] vanishes
/// numerically the bound tightens to the plain vanishing of cross-cluster
/// elements of W.
ResidualReport check_hypervirial(const HermitianMatrix& h,
                                 const HermitianMatrix& w,
                                 const SpectralDecomposition& d,
                                 const DegeneracyPartition& p,
                                 const std::string& w_label);

/// Convenience wrapper evaluating H(lambda) and its partition internally.
ResidualReport check_hypervirial(const ModelDefinition& m, double lambda,
                                 const HermitianMatrix& w,
                                 const std::string& w_label, double tol_deg);

}  // namespace hftlab
