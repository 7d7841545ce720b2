#include "hftlab/scan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "hftlab/checks.hpp"

namespace hftlab {

namespace {

constexpr double kLambdaTol = 1e-12;  // refinement width in lambda
constexpr double kMergeTol = 1e-9;    // candidates closer than this coincide

double min_adjacent_gap(const MatrixFamily& h, double x) {
  const Eigen::VectorXd e =
      eigendecompose(evaluate_matrix(h, x), x).eigenvalues;
  double g = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < e.size(); ++k) g = std::min(g, e[k + 1] - e[k]);
  return g;
}

/// Golden-section minimization of f over [a, b] to interval width tol.
double golden_minimize(const std::function<double(double)>& f, double a,
                       double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<double> LambdaGrid::values() const {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(stop > start)) throw std::invalid_argument("grid needs stop > start");
  std::vector<double> v(static_cast<size_t>(points));
  const double step = (stop - start) / (points - 1);
  for (int i = 0; i < points; ++i) v[static_cast<size_t>(i)] = start + i * step;
  v.back() = stop;
  return v;
}

ScanResult scan_degeneracies(const ModelDefinition& m, const LambdaGrid& grid,
                             double tol_deg) {
  ScanResult out;
  out.grid = grid.values();
  const MatrixFamily& h = m.hamiltonian();
  if (m.dimension < 2) return out;

  const auto gap = [&](double x) { return min_adjacent_gap(h, x); };
  out.gaps.reserve(out.grid.size());
  for (double x : out.grid) out.gaps.push_back(gap(x));

  const int n = static_cast<int>(out.grid.size());
  std::vector<DegeneracyCandidate> found;
  for (int i = 0; i < n; ++i) {
    const double gi = out.gaps[static_cast<size_t>(i)];
    const bool left_ok = i == 0 || out.gaps[static_cast<size_t>(i - 1)] >= gi;
    const bool right_ok =
        i == n - 1 || out.gaps[static_cast<size_t>(i + 1)] >= gi;
    if (!left_ok || !right_ok) continue;
    const double a = out.grid[static_cast<size_t>(std::max(0, i - 1))];
    const double b = out.grid[static_cast<size_t>(std::min(n - 1, i + 1))];
    const double x0 =
        a < b ? golden_minimize(gap, a, b, kLambdaTol) : out.grid[0];

    const HermitianMatrix h0 = evaluate_matrix(h, x0);
    const double tau = resolve_degeneracy_tolerance(h0, tol_deg);
    const double g0 = gap(x0);
    if (g0 > tau) continue;

    const SpectralDecomposition d = eigendecompose(h0, x0);
    const DegeneracyPartition p = cluster_degeneracies(d, tau);
    found.push_back({x0, p.max_multiplicity(), g0});
  }

  std::sort(found.begin(), found.end(),
            [](const DegeneracyCandidate& a, const DegeneracyCandidate& b) {
              return a.lambda0 < b.lambda0;
            });
  for (const auto& c : found) {
    if (!out.candidates.empty() &&
        std::abs(c.lambda0 - out.candidates.back().lambda0) <= kMergeTol) {
      if (c.min_gap < out.candidates.back().min_gap) out.candidates.back() = c;
      continue;
    }
    out.candidates.push_back(c);
  }
  return out;
}

}  // namespace hftlab
