#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hftlab/checks.hpp"
#include "hftlab/ensemble.hpp"
#include "hftlab/model.hpp"
#include "hftlab/scan.hpp"

namespace hftlab {

/// Schedulable check categories, in the order the suite runs them.
const std::vector<std::string>& known_check_names();

struct RunConfig {
  LambdaGrid grid;                      ///< used when single_lambda is absent
  std::optional<double> single_lambda;  ///< verify one point, no scan
  std::vector<double> betas = {1.0};
  double tol_deg = 0.0;  ///< <= 0 picks the scale-aware default per point
  FDConfig fd;
  std::vector<std::string> checks;  ///< empty = all categories
  std::uint64_t seed = 20260822;
  std::string model_label = "model";
};

struct SuiteResult {
  std::string model_label;
  std::vector<double> lambdas;  ///< grid plus any refined degeneracy points
  std::vector<DegeneracyCandidate> degeneracy_points;
  std::vector<ResidualReport> reports;

  int failures() const;
  bool all_pass() const { return failures() == 0; }
};

/// Run every enabled check at every lambda. Degeneracy points found by the
/// scan are inserted into the grid so the degenerate-cluster checks always
/// see them. Throws std::invalid_argument for an unknown check name.
SuiteResult run_verification(const ModelDefinition& m, const RunConfig& cfg);

std::string to_text(const SuiteResult& r);
std::string to_json(const SuiteResult& r);

std::string to_text(const ScanResult& r, const std::string& model_label);
std::string to_json(const ScanResult& r, const std::string& model_label);

}  // namespace hftlab
