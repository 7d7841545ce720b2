#pragma once

#include <vector>

#include "hftlab/model.hpp"
#include "hftlab/spectral.hpp"

namespace hftlab {

/// Uniform closed grid start..stop with `points` samples.
struct LambdaGrid {
  double start = -1.0;
  double stop = 1.0;
  int points = 21;

  /// The sample values, endpoints included. Throws std::invalid_argument
  /// when points < 2 or stop <= start.
  std::vector<double> values() const;
};

/// A refined location where the spectrum degenerates.
struct DegeneracyCandidate {
  double lambda0 = 0.0;  ///< refined to ~1e-12 in lambda
  int multiplicity = 1;  ///< size of the largest cluster at lambda0
  double min_gap = 0.0;  ///< smallest adjacent-level gap at lambda0
};

struct ScanResult {
  std::vector<DegeneracyCandidate> candidates;  ///< ascending in lambda0
  std::vector<double> grid;                     ///< the sampled lambdas
  std::vector<double> gaps;                     ///< min adjacent gap per sample
};

/// Locate degeneracies of H(lambda) on the grid: sample the smallest
/// adjacent-level gap, refine every local minimum (endpoints included) by
/// golden-section search, and keep refined minima whose gap falls within the
/// degeneracy tolerance (tol_deg <= 0 picks the scale-aware default at the
/// refined point). Nearby candidates are merged.
ScanResult scan_degeneracies(const ModelDefinition& m, const LambdaGrid& grid,
                             double tol_deg);

}  // namespace hftlab
