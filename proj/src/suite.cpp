#include "hftlab/suite.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hftlab {

namespace {

using ordered_json = nlohmann::ordered_json;

bool enabled(const RunConfig& cfg, const std::string& name) {
  if (cfg.checks.empty()) return true;
  return std::find(cfg.checks.begin(), cfg.checks.end(), name) !=
         cfg.checks.end();
}

void validate_check_names(const RunConfig& cfg) {
  const auto& known = known_check_names();
  for (const auto& c : cfg.checks) {
    if (std::find(known.begin(), known.end(), c) == known.end()) {
      std::ostringstream os;
      os << "unknown check '" << c << "'; available:";
      for (const auto& k : known) os << " " << k;
      throw std::invalid_argument(os.str());
    }
  }
}

double min_gap_of(const Eigen::VectorXd& e) {
  double g = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < e.size(); ++k) g = std::min(g, e[k + 1] - e[k]);
  return g;
}

HermitianMatrix function_of_h(const SpectralDecomposition& d,
                              const MatrixFunctionSpec& f) {
  return HermitianMatrix::from_dense(matrix_function(d, f).absolute());
}

std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

const std::vector<std::string>& known_check_names() {
  static const std::vector<std::string> names = {
      "diagonal",     "offdiag",        "unitary_mix",
      "sum_rule",     "hypervirial",    "weighted_trace",
      "function_trace", "free_energy",  "observable"};
  return names;
}

int SuiteResult::failures() const {
  int n = 0;
  for (const auto& r : reports) n += r.pass ? 0 : 1;
  return n;
}

SuiteResult run_verification(const ModelDefinition& m, const RunConfig& cfg) {
  validate_check_names(cfg);
  SuiteResult out;
  out.model_label = cfg.model_label;

  std::vector<double> lambdas;
  if (cfg.single_lambda) {
    const double lam = *cfg.single_lambda;
    lambdas.push_back(lam);
    const HermitianMatrix H = evaluate_matrix(m.hamiltonian(), lam);
    const SpectralDecomposition d = eigendecompose(H, lam);
    const double tau = resolve_degeneracy_tolerance(H, cfg.tol_deg);
    const DegeneracyPartition p = cluster_degeneracies(d, tau);
    if (p.any_degenerate()) {
      out.degeneracy_points.push_back(
          {lam, p.max_multiplicity(), min_gap_of(d.eigenvalues)});
    }
  } else {
    lambdas = cfg.grid.values();
    const ScanResult sc = scan_degeneracies(m, cfg.grid, cfg.tol_deg);
    out.degeneracy_points = sc.candidates;
    for (const auto& c : sc.candidates) lambdas.push_back(c.lambda0);
    std::sort(lambdas.begin(), lambdas.end());
    lambdas.erase(std::unique(lambdas.begin(), lambdas.end(),
                              [](double a, double b) {
                                return std::abs(a - b) <= 1e-12;
                              }),
                  lambdas.end());
  }
  out.lambdas = lambdas;

  std::mt19937_64 rng(cfg.seed);
  const MatrixFamily* w_fam = m.find("W");
  const MatrixFamily* a_fam = m.find("A");

  for (double lam : lambdas) {
    const HermitianMatrix H = evaluate_matrix(m.hamiltonian(), lam);
    const SpectralDecomposition d = eigendecompose(H, lam);
    const double tau = resolve_degeneracy_tolerance(H, cfg.tol_deg);
    const DegeneracyPartition p = cluster_degeneracies(d, tau);

    if (enabled(cfg, "diagonal")) {
      out.reports.push_back(check_diagonal_hft(m, lam, cfg.tol_deg, cfg.fd));
    }
    if (p.any_degenerate()) {
      for (const auto& c : p.clusters) {
        if (!c.degenerate()) continue;
        if (enabled(cfg, "unitary_mix")) {
          ResidualReport worst;
          for (int i = 0; i < 5; ++i) {
            const Eigen::MatrixXcd mix = random_unitary(c.size, rng);
            ResidualReport rep =
                check_unitary_mix(m, lam, mix, c, cfg.tol_deg);
            if (i == 0 || !(rep.residual <= worst.residual)) {
              worst = std::move(rep);
            }
          }
          worst.notes.push_back("worst of 5 random mixes, cluster at levels " +
                                num(c.start) + ".." +
                                num(c.start + c.size - 1));
          out.reports.push_back(std::move(worst));
        }
        if (enabled(cfg, "sum_rule")) {
          out.reports.push_back(
              check_sum_rule(m, lam, c, 100, rng, cfg.tol_deg, cfg.fd));
        }
      }
    } else if (enabled(cfg, "offdiag")) {
      out.reports.push_back(check_offdiag_hft(m, lam, cfg.tol_deg, cfg.fd));
    }

    if (enabled(cfg, "hypervirial")) {
      out.reports.push_back(check_hypervirial(
          H, function_of_h(d, MatrixFunctionSpec::power(2)), d, p, "H^2"));
      out.reports.push_back(check_hypervirial(
          H, function_of_h(d, MatrixFunctionSpec::polynomial({1.0, 2.0, 0.5})),
          d, p, "1 + 2 H + 0.5 H^2"));
      if (w_fam) {
        out.reports.push_back(check_hypervirial(
            H, evaluate_matrix(*w_fam, lam), d, p, "model W"));
      }
    }

    if (enabled(cfg, "weighted_trace")) {
      HermitianMatrix w = function_of_h(d, MatrixFunctionSpec::power(2));
      std::string w_label = "H^2";
      if (w_fam) {
        HermitianMatrix wm = evaluate_matrix(*w_fam, lam);
        const double comm =
            max_abs((H.mat() * wm.mat() - wm.mat() * H.mat()).eval());
        if (comm <=
            1e-10 * (1.0 + H.max_abs_entry() * wm.max_abs_entry())) {
          w = std::move(wm);
          w_label = "model W";
        } else {
          w_label = "H^2 (model W does not commute here)";
        }
      }
      TraceComparison c =
          trace_weighted_derivative(m, lam, w, cfg.tol_deg, cfg.fd);
      c.notes.insert(c.notes.begin(), "W = " + w_label);
      out.reports.push_back(
          to_report("weighted_trace", lam, c, tol::weighted_trace_scale));
    }

    if (enabled(cfg, "function_trace")) {
      std::vector<MatrixFunctionSpec> fns;
      for (double beta : cfg.betas) {
        fns.push_back(MatrixFunctionSpec::boltzmann(beta));
      }
      fns.push_back(MatrixFunctionSpec::polynomial({0.0, 1.0}));
      for (const auto& f : fns) {
        TraceComparison c =
            function_trace_derivative(m, lam, f, cfg.tol_deg, cfg.fd);
        out.reports.push_back(
            to_report("function_trace", lam, c, tol::function_trace_rel));
      }
    }

    if (enabled(cfg, "free_energy")) {
      for (double beta : cfg.betas) {
        TraceComparison c =
            free_energy_derivative(m, beta, lam, cfg.tol_deg, cfg.fd);
        out.reports.push_back(
            to_report("free_energy", lam, c, tol::free_energy_rel));
      }
    }

    if (enabled(cfg, "observable") && a_fam) {
      const HermitianMatrix w =
          function_of_h(d, MatrixFunctionSpec::boltzmann(1.0));
      ObservableResult r =
          observable_trace_derivative(m, lam, w, cfg.tol_deg, cfg.fd);
      out.reports.push_back(to_report("observable", lam, r.comparison,
                                      tol::observable_scale,
                                      !r.condition_ok));
    }
  }
  return out;
}

std::string to_text(const SuiteResult& r) {
  std::ostringstream os;
  os << "model " << r.model_label << ": " << r.lambdas.size()
     << " lambda points, " << r.degeneracy_points.size()
     << " degeneracy point" << (r.degeneracy_points.size() == 1 ? "" : "s")
     << "\n";
  for (const auto& c : r.degeneracy_points) {
    os << "  degenerate at lambda0 = " << c.lambda0 << " (g = "
       << c.multiplicity << ", min gap = " << c.min_gap << ")\n";
  }
  os << "\n";
  for (const auto& rep : r.reports) {
    os << (rep.pass ? "[PASS] " : "[FAIL] ") << std::left << std::setw(16)
       << rep.name << " lambda = " << std::setw(12) << rep.lambda
       << " residual = " << std::setw(13) << rep.residual
       << " tol = " << rep.tolerance << "\n";
    if (!rep.pass) {
      if (!rep.lhs.empty()) os << "    " << rep.lhs << "\n";
      if (!rep.rhs.empty()) os << "    " << rep.rhs << "\n";
      for (const auto& n : rep.notes) os << "    note: " << n << "\n";
    }
  }
  os << "\nsummary: " << r.reports.size() << " checks, " << r.failures()
     << " failed\n";
  return os.str();
}

std::string to_json(const SuiteResult& r) {
  ordered_json j;
  j["model"] = r.model_label;
  j["grid"] = r.lambdas;
  ordered_json pts = ordered_json::array();
  for (const auto& c : r.degeneracy_points) {
    ordered_json p;
    p["lambda0"] = c.lambda0;
    p["g"] = c.multiplicity;
    pts.push_back(std::move(p));
  }
  j["degeneracy_points"] = std::move(pts);
  ordered_json checks = ordered_json::array();
  for (const auto& rep : r.reports) {
    ordered_json c;
    c["name"] = rep.name;
    c["lambda"] = rep.lambda;
    c["residual"] = rep.residual;
    c["tolerance"] = rep.tolerance;
    c["verdict"] = rep.pass ? "pass" : "fail";
    c["notes"] = rep.notes;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  j["timestamp"] = iso_timestamp();
  return j.dump(2) + "\n";
}

std::string to_text(const ScanResult& r, const std::string& model_label) {
  std::ostringstream os;
  os << "model " << model_label << ": scanned " << r.grid.size()
     << " points in [" << (r.grid.empty() ? 0.0 : r.grid.front()) << ", "
     << (r.grid.empty() ? 0.0 : r.grid.back()) << "]\n";
  if (r.candidates.empty()) {
    os << "  no degeneracies found\n";
  } else {
    for (const auto& c : r.candidates) {
      os << "  degeneracy at lambda0 = " << c.lambda0 << " (g = "
         << c.multiplicity << ", min gap = " << c.min_gap << ")\n";
    }
  }
  return os.str();
}

std::string to_json(const ScanResult& r, const std::string& model_label) {
  ordered_json j;
  j["model"] = model_label;
  j["grid"] = r.grid;
  ordered_json pts = ordered_json::array();
  for (const auto& c : r.candidates) {
    ordered_json p;
    p["lambda0"] = c.lambda0;
    p["g"] = c.multiplicity;
    pts.push_back(std::move(p));
  }
  j["degeneracy_points"] = std::move(pts);
  j["checks"] = ordered_json::array();
  j["timestamp"] = iso_timestamp();
  return j.dump(2) + "\n";
}

}  // namespace hftlab
