// End-to-end acceptance suite: one line of output per criterion, exit 0
// only if every criterion holds. Tolerances are pinned here, next to the
// checks they gate.
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hftlab/builtins.hpp"
#include "hftlab/checks.hpp"
#include "hftlab/ensemble.hpp"
#include "hftlab/fd.hpp"
#include "hftlab/model.hpp"
#include "hftlab/scan.hpp"
#include "hftlab/spectral.hpp"

using namespace hftlab;

namespace {

bool all_ok = true;

void criterion(int number, const std::string& label,
               const std::function<bool()>& body) {
  bool ok = false;
  std::string note;
  try {
    ok = body();
  } catch (const std::exception& e) {
    note = std::string(" (") + e.what() + ")";
  }
  std::printf("[%s] %2d: %s%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
              note.c_str());
  all_ok = all_ok && ok;
}

RotationResult adapted(const ModelDefinition& m, double l) {
  const HermitianMatrix h = evaluate_matrix(m.hamiltonian(), l);
  const HermitianMatrix dh = evaluate_derivative(m.hamiltonian(), l);
  const SpectralDecomposition d = eigendecompose(h, l);
  return rotate_within_clusters(
      d, dh, cluster_degeneracies(d, default_degeneracy_tolerance(h)));
}

}  // namespace

int main() {
  std::mt19937_64 rng(20260822);

  criterion(1, "a scrambled degenerate basis is rotated to branch slopes", [&] {
    const ModelDefinition m = builtin_model("crossing");
    const HermitianMatrix dh = evaluate_derivative(m.hamiltonian(), 0.0);
    SpectralDecomposition d =
        eigendecompose(evaluate_matrix(m.hamiltonian(), 0.0), 0.0);
    const double s = 1.0 / std::sqrt(2.0);
    d.eigenvectors << s, s, s, -s;  // hide the sharp basis on purpose
    const RotationResult r =
        rotate_within_clusters(d, dh, cluster_degeneracies(d, 1e-8));
    if (std::abs(r.slopes[0] + 1.0) > 1e-12) return false;
    if (std::abs(r.slopes[1] - 1.0) > 1e-12) return false;
    // the coordinate axes come back out
    if (std::abs(std::abs(r.adapted.eigenvectors(1, 0)) - 1.0) > 1e-10) {
      return false;
    }
    if (std::abs(std::abs(r.adapted.eigenvectors(0, 1)) - 1.0) > 1e-10) {
      return false;
    }
    const BranchSlopes fd =
        fd_branch_slopes(m.hamiltonian(), 0.0, r.adapted.eigenvectors);
    if (!fd.reliable) return false;
    for (int k = 0; k < 2; ++k) {
      if (std::abs(fd.slopes[k] - r.slopes[k]) > 1e-6) return false;
    }
    return true;
  });

  criterion(2, "20 random cluster mixes reproduce fd slope matrices", [&] {
    for (const auto& name : {"crossing", "spin1"}) {
      const ModelDefinition m = builtin_model(name);
      const HermitianMatrix dh = evaluate_derivative(m.hamiltonian(), 0.0);
      const RotationResult r = adapted(m, 0.0);
      const BranchSlopes fd = fd_branch_slopes(
          m.hamiltonian(), 0.0, r.adapted.eigenvectors);
      if (!fd.reliable) return false;
      for (const auto& c : r.partition.clusters) {
        if (!c.degenerate()) continue;
        const auto vc =
            r.adapted.eigenvectors.middleCols(c.start, c.size);
        const Eigen::VectorXd fds = fd.slopes.segment(c.start, c.size);
        for (int t = 0; t < 20; ++t) {
          const Eigen::MatrixXcd u = random_unitary(c.size, rng);
          const Eigen::MatrixXcd chi = vc * u;
          const Eigen::MatrixXcd lhs = chi.adjoint() * dh.mat() * chi;
          const Eigen::MatrixXcd rhs =
              u.adjoint() * fds.asDiagonal().toDenseMatrix().cast<cplx>() * u;
          if (max_abs(lhs - rhs) > 1e-8) return false;
        }
      }
    }
    return true;
  });

  criterion(3, "cluster slope sums are mix-invariant and match fd sums", [&] {
    struct Case {
      const char* model;
      double lambda;
      DegenerateCluster cluster;
    };
    const Case cases[] = {{"crossing", 0.0, {0, 2}},
                          {"spin1", 0.0, {0, 3}},
                          {"persistent", 1.0, {1, 2}}};
    for (const auto& cs : cases) {
      const ModelDefinition m = builtin_model(cs.model);
      const HermitianMatrix dh =
          evaluate_derivative(m.hamiltonian(), cs.lambda);
      const RotationResult r = adapted(m, cs.lambda);
      const auto vc = r.adapted.eigenvectors.middleCols(cs.cluster.start,
                                                        cs.cluster.size);
      const double base = (vc.adjoint() * dh.mat() * vc).trace().real();
      for (int t = 0; t < 100; ++t) {
        const Eigen::MatrixXcd mix = vc * random_unitary(cs.cluster.size, rng);
        const double tr = (mix.adjoint() * dh.mat() * mix).trace().real();
        if (std::abs(tr - base) > 1e-10 * (1.0 + dh.max_abs_entry())) {
          return false;
        }
      }
      const BranchSlopes fd = fd_branch_slopes(
          m.hamiltonian(), cs.lambda, r.adapted.eigenvectors);
      if (!fd.reliable) return false;
      const double fd_sum =
          fd.slopes.segment(cs.cluster.start, cs.cluster.size).sum();
      if (std::abs(base - fd_sum) > 1e-6) return false;
    }
    return true;
  });

  criterion(4, "element-wise slope relation holds off degeneracy", [&] {
    const ModelDefinition m = builtin_model("avoided");
    for (double l : {-1.0, 0.3, 1.0}) {
      const ResidualReport r = check_offdiag_hft(m, l, 0.0);
      if (!r.pass || r.residual > 1e-5) return false;
    }
    return true;
  });

  criterion(5, "functions of H have no elements across energy clusters", [&] {
    for (const auto& name : builtin_names()) {
      const ModelDefinition m = builtin_model(name);
      for (double l : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const HermitianMatrix h = evaluate_matrix(m.hamiltonian(), l);
        const SpectralDecomposition d = eigendecompose(h, l);
        const DegeneracyPartition p =
            cluster_degeneracies(d, default_degeneracy_tolerance(h));
        const std::vector<MatrixFunctionSpec> ws = {
            MatrixFunctionSpec::power(2),
            MatrixFunctionSpec::polynomial({1.0, 2.0, 0.5})};
        for (const auto& f : ws) {
          const HermitianMatrix w =
              HermitianMatrix::from_dense(matrix_function(d, f).absolute());
          const ResidualReport rep = check_hypervirial(h, w, d, p, "f(H)");
          if (!rep.pass) return false;
          // direct form of the same statement
          const Eigen::MatrixXcd wb =
              d.eigenvectors.adjoint() * w.mat() * d.eigenvectors;
          for (std::size_t a = 0; a < p.clusters.size(); ++a) {
            for (std::size_t b = 0; b < p.clusters.size(); ++b) {
              if (a == b) continue;
              for (int i = p.clusters[a].start;
                   i < p.clusters[a].start + p.clusters[a].size; ++i) {
                for (int j = p.clusters[b].start;
                     j < p.clusters[b].start + p.clusters[b].size; ++j) {
                  if (std::abs(wb(i, j)) >
                      1e-10 * (1.0 + w.max_abs_entry())) {
                    return false;
                  }
                }
              }
            }
          }
        }
      }
    }
    return true;
  });

  criterion(6, "weighted trace derivative agrees three ways", [&] {
    for (const auto& name : {"crossing", "avoided"}) {
      const ModelDefinition m = builtin_model(name);
      const std::vector<MatrixFunctionSpec> fs = {
          MatrixFunctionSpec::boltzmann(0.1), MatrixFunctionSpec::boltzmann(1.0),
          MatrixFunctionSpec::boltzmann(10.0),
          MatrixFunctionSpec::polynomial({0.0, 1.0})};
      for (const auto& f : fs) {
        for (double l : {-0.7, 0.0, 0.4}) {
          const TraceComparison c = function_trace_derivative(m, l, f, 0.0);
          if (!c.oracle.has_value()) return false;
          if (c.residual > 1e-6 * c.scale) return false;
        }
      }
    }
    return true;
  });

  criterion(7, "free-energy slope hits closed forms across temperature", [&] {
    const ModelDefinition m = builtin_model("crossing");
    {
      const TraceComparison c = free_energy_derivative(m, 1.0, 1.0, 0.0);
      const double expect = -std::tanh(1.0);
      if (std::abs(c.direct - expect) > 1e-6) return false;
      if (std::abs(c.spectral - expect) > 1e-6) return false;
    }
    {
      const TraceComparison c = free_energy_derivative(m, 50.0, 1.0, 0.0);
      if (std::abs(c.direct + 1.0) > 1e-3) return false;
      if (std::abs(c.spectral + 1.0) > 1e-3) return false;
    }
    {
      const TraceComparison c = free_energy_derivative(m, 1e-6, 1.0, 0.0);
      if (std::abs(c.direct) > 1e-3) return false;
      if (std::abs(c.spectral) > 1e-3) return false;
    }
    return true;
  });

  criterion(8, "observable gate passes compatible A, names violations", [&] {
    const ModelDefinition good = parse_model(
        "matrix H { dim = 2; [1,1] = lambda; [2,2] = -lambda; }\n"
        "matrix A { dim = 2; [1,1] = lambda^2 + lambda; "
        "[2,2] = lambda^2 - lambda; }\n");  // A = H^2 + H: shares H's basis
    for (double l : {0.0, 0.5}) {
      const SpectralDecomposition d =
          eigendecompose(evaluate_matrix(good.hamiltonian(), l), l);
      const HermitianMatrix w = HermitianMatrix::from_dense(
          matrix_function(d, MatrixFunctionSpec::boltzmann(1.0)).absolute());
      const ObservableResult r = observable_trace_derivative(good, l, w, 0.0);
      if (!r.condition_ok) return false;
      if (r.comparison.residual > 1e-8 * r.comparison.scale) return false;
    }
    const ModelDefinition bad = parse_model(
        "matrix H { dim = 2; [1,1] = lambda; [2,2] = -lambda; }\n"
        "matrix A { dim = 2; [1,2] = lambda; }\n");
    const ObservableResult r = observable_trace_derivative(
        bad, 0.0, HermitianMatrix::identity(2), 0.0);
    if (r.condition_ok) return false;
    bool named = false;
    for (const auto& n : r.condition_notes) {
      if (n.find("cluster") != std::string::npos) named = true;
    }
    return named;
  });

  criterion(9, "scan pins true crossings and ignores avoided ones", [&] {
    {
      const ScanResult r = scan_degeneracies(builtin_model("crossing"),
                                             LambdaGrid{-1.0, 1.0, 21}, 0.0);
      if (r.candidates.size() != 1) return false;
      if (std::abs(r.candidates[0].lambda0) > 1e-10) return false;
    }
    {
      const ScanResult r = scan_degeneracies(builtin_model("spin1"),
                                             LambdaGrid{-1.0, 1.0, 41}, 0.0);
      if (r.candidates.size() != 1) return false;
      if (std::abs(r.candidates[0].lambda0) > 1e-10) return false;
      if (r.candidates[0].multiplicity != 3) return false;
    }
    {
      const ScanResult r = scan_degeneracies(builtin_model("avoided"),
                                             LambdaGrid{-1.0, 1.0, 41}, 0.0);
      if (!r.candidates.empty()) return false;
    }
    return true;
  });

  criterion(10, "symbolic derivatives check out; bad input is located", [&] {
    // random expression trees against Richardson finite differences
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    const std::function<Expr(int)> gen = [&](int depth) -> Expr {
      std::uniform_int_distribution<int> pick(0, depth == 0 ? 1 : 8);
      switch (pick(rng)) {
        case 0: return Expr::constant(val(rng));
        case 1: return Expr::parameter();
        case 2: return Expr::negate(gen(depth - 1));
        case 3: return Expr::add(gen(depth - 1), gen(depth - 1));
        case 4: return Expr::sub(gen(depth - 1), gen(depth - 1));
        case 5: return Expr::mul(gen(depth - 1), gen(depth - 1));
        case 6: return Expr::div(gen(depth - 1), gen(depth - 1));
        case 7: {
          std::uniform_int_distribution<int> ex(-3, 3);
          return Expr::pow(gen(depth - 1), ex(rng));
        }
        default: {
          std::uniform_int_distribution<int> f(0, 4);
          return Expr::call(static_cast<Expr::Func>(f(rng)), gen(depth - 1));
        }
      }
    };
    const auto fd_cplx = [](const Expr& e, double l, double h) {
      const auto d = [&](double step) {
        return (e.evaluate(l + step) - e.evaluate(l - step)) / (2.0 * step);
      };
      return (4.0 * d(h / 2.0) - d(h)) / 3.0;
    };
    int accepted = 0;
    for (int t = 0; t < 100; ++t) {
      const Expr e = gen(5);
      const Expr de = e.derivative();
      for (int k = 0; k < 10; ++k) {
        const double l = val(rng);
        cplx value, slope, fd1, fd2;
        try {
          value = e.evaluate(l);
          slope = de.evaluate(l);
          fd1 = fd_cplx(e, l, 1e-4);
          fd2 = fd_cplx(e, l, 1e-5);
        } catch (const EvalError&) {
          continue;
        }
        const double tolerance = 1e-6 * (1.0 + std::abs(slope));
        if (std::abs(value) > 1e6 || std::abs(slope) > 1e6) continue;
        if (std::abs(fd1 - fd2) > 0.25 * tolerance) continue;
        ++accepted;
        if (std::abs(slope - fd2) > tolerance) return false;
      }
    }
    if (accepted < 200) return false;

    // malformed model text is located by line and column
    try {
      parse_model("matrix H {\n  dim = 2;\n  [1,1] = lambda +;\n}");
      return false;
    } catch (const ParseError& e) {
      if (e.where().line != 3) return false;
      if (std::string(e.what()).find("line 3, column") == std::string::npos) {
        return false;
      }
    }
    try {
      parse_model("matrx H { dim = 2; }");
      return false;
    } catch (const ParseError& e) {
      if (e.where().line != 1 || e.where().column != 1) return false;
    }
    return true;
  });

  std::printf("%s\n", all_ok ? "acceptance: all criteria hold"
                             : "acceptance: FAILURES above");
  return all_ok ? 0 : 1;
}
