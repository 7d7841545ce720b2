#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace hftlab {

/// Outcome of one identity check at one lambda. `pass` is derived, never set
/// by hand: a report passes exactly when its residual is a finite number not
/// exceeding the tolerance. `lhs`/`rhs` are short human-readable summaries of
/// the two sides being compared (a scalar, or a description of a matrix).
struct ResidualReport {
  std::string name;
  double lambda = 0.0;
  std::string lhs;
  std::string rhs;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<std::string> notes;
};

inline ResidualReport make_report(std::string name, double lambda,
                                  double residual, double tolerance,
                                  std::vector<std::string> notes = {},
                                  std::string lhs = {}, std::string rhs = {}) {
  ResidualReport r;
  r.name = std::move(name);
  r.lambda = lambda;
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  r.residual = residual;
  r.tolerance = tolerance;
  r.pass = std::isfinite(residual) && residual <= tolerance;
  r.notes = std::move(notes);
  return r;
}

}  // namespace hftlab
