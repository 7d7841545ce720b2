#include <random>
#include <string>

#include "doctest.h"
#include "hftlab/builtins.hpp"
#include "hftlab/checks.hpp"

using namespace hftlab;

TEST_CASE("slope check passes on every bundled model, degenerate or not") {
  for (const auto& name : builtin_names()) {
    const ModelDefinition m = builtin_model(name);
    for (double l : {0.0, 0.6}) {
      CAPTURE(name);
      CAPTURE(l);
      const ResidualReport r = check_diagonal_hft(m, l, 0.0);
      CHECK(r.pass);
      CHECK(r.name == "diagonal_hft");
      CHECK(r.tolerance == tol::diagonal_hft);
    }
  }
}

TEST_CASE("slope check accepts an explicit degeneracy tolerance") {
  const ModelDefinition m = builtin_model("crossing");
  // huge tolerance groups both levels into one cluster even at l = 0.5;
  // the adapted basis still reproduces the branch slopes
  const ResidualReport r = check_diagonal_hft(m, 0.5, 2.0);
  CHECK(r.pass);
}

TEST_CASE("degenerate cluster mixes reproduce the projected derivative") {
  const ModelDefinition m = builtin_model("crossing");
  std::mt19937_64 rng(17);
  const DegenerateCluster cluster{0, 2};
  for (int t = 0; t < 10; ++t) {
    const ResidualReport r = check_unitary_mix(
        m, 0.0, random_unitary(2, rng), cluster, 0.0);
    CHECK(r.pass);
    CHECK(r.residual <= tol::unitary_mix);
  }
  // the identity mix is the adapted basis itself
  const ResidualReport id = check_unitary_mix(
      m, 0.0, Eigen::MatrixXcd::Identity(2, 2), cluster, 0.0);
  CHECK(id.pass);
}

TEST_CASE("mix check validates its inputs") {
  const ModelDefinition m = builtin_model("crossing");
  const DegenerateCluster cluster{0, 2};
  // not unitary
  CHECK_THROWS_AS(check_unitary_mix(
                      m, 0.0, 2.0 * Eigen::MatrixXcd::Identity(2, 2),
                      cluster, 0.0),
                  std::invalid_argument);
  // wrong size
  CHECK_THROWS_AS(check_unitary_mix(
                      m, 0.0, Eigen::MatrixXcd::Identity(3, 3), cluster, 0.0),
                  std::invalid_argument);
  // no such degenerate cluster away from the crossing
  CHECK_THROWS_AS(check_unitary_mix(
                      m, 0.5, Eigen::MatrixXcd::Identity(2, 2), cluster, 0.0),
                  std::invalid_argument);
}

TEST_CASE("cluster slope sums are basis independent and match branch sums") {
  std::mt19937_64 rng(19);
  {
    const ModelDefinition m = builtin_model("crossing");
    const ResidualReport r =
        check_sum_rule(m, 0.0, DegenerateCluster{0, 2}, 100, rng, 0.0);
    CHECK(r.pass);
  }
  {
    const ModelDefinition m = builtin_model("spin1");
    const ResidualReport r =
        check_sum_rule(m, 0.0, DegenerateCluster{0, 3}, 100, rng, 0.0);
    CHECK(r.pass);
  }
  {
    // the pair that never splits, away from the triple point
    const ModelDefinition m = builtin_model("persistent");
    const ResidualReport r =
        check_sum_rule(m, 1.0, DegenerateCluster{1, 2}, 100, rng, 0.0);
    CHECK(r.pass);
  }
}

TEST_CASE("sum rule validates its inputs") {
  const ModelDefinition m = builtin_model("crossing");
  std::mt19937_64 rng(23);
  CHECK_THROWS_AS(
      check_sum_rule(m, 0.0, DegenerateCluster{0, 2}, 0, rng, 0.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      check_sum_rule(m, 0.5, DegenerateCluster{0, 2}, 10, rng, 0.0),
      std::invalid_argument);
}

TEST_CASE("element-wise relation holds at nondegenerate points") {
  {
    const ModelDefinition m = builtin_model("avoided");
    for (double l : {-1.0, 0.3, 1.0}) {
      const ResidualReport r = check_offdiag_hft(m, l, 0.0);
      CHECK(r.pass);
      CHECK(r.residual <= tol::offdiag_hft);
    }
  }
  {
    const ModelDefinition m = builtin_model("crossing");
    const ResidualReport r = check_offdiag_hft(m, 0.5, 0.0);
    CHECK(r.pass);
  }
}

TEST_CASE("element-wise relation refuses degenerate points with guidance") {
  const ModelDefinition m = builtin_model("crossing");
  try {
    check_offdiag_hft(m, 0.0, 0.0);
    FAIL("expected rejection at the crossing");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("degenerate") != std::string::npos);
  }
}

TEST_CASE("commuting weights have no cross-cluster elements") {
  for (const auto& name : builtin_names()) {
    const ModelDefinition m = builtin_model(name);
    for (double l : {-0.8, 0.0, 0.3}) {
      CAPTURE(name);
      CAPTURE(l);
      const HermitianMatrix h = evaluate_matrix(m.hamiltonian(), l);
      const SpectralDecomposition d = eigendecompose(h, l);
      const DegeneracyPartition p =
          cluster_degeneracies(d, default_degeneracy_tolerance(h));
      const HermitianMatrix w = HermitianMatrix::from_dense(
          matrix_function(d, MatrixFunctionSpec::power(2)).absolute());
      const ResidualReport r = check_hypervirial(h, w, d, p, "H^2");
      CHECK(r.pass);
    }
  }
}

TEST_CASE("noncommuting weights stay within the commutator bound") {
  const ModelDefinition m = builtin_model("crossing");
  const HermitianMatrix h = evaluate_matrix(m.hamiltonian(), 1.0);
  const SpectralDecomposition d = eigendecompose(h, 1.0);
  const DegeneracyPartition p =
      cluster_degeneracies(d, default_degeneracy_tolerance(h));
  const HermitianMatrix w =
      HermitianMatrix::from_upper(2, {{0, 1, cplx(1.0, 0.0)}});
  const ResidualReport r = check_hypervirial(h, w, d, p, "coupler");
  CHECK(r.pass);
  bool saw_noncommuting = false;
  for (const auto& n : r.notes) {
    if (n.find("non-commuting") != std::string::npos) saw_noncommuting = true;
  }
  CHECK(saw_noncommuting);
}

TEST_CASE("a basis that is not an eigenbasis is caught") {
  // H = identity commutes with everything, so cross-cluster elements of W
  // must vanish; handing in the eigensystem of a different matrix plants
  // nonzero elements that the check has to flag.
  const HermitianMatrix h = HermitianMatrix::identity(2);
  const ModelDefinition other = builtin_model("avoided");
  const SpectralDecomposition d =
      eigendecompose(evaluate_matrix(other.hamiltonian(), 1.0), 1.0);
  const DegeneracyPartition p = cluster_degeneracies(d, 1e-8);
  REQUIRE(p.clusters.size() == 2);
  const HermitianMatrix w =
      HermitianMatrix::from_upper(2, {{0, 1, cplx(1.0, 0.0)}});
  const ResidualReport r = check_hypervirial(h, w, d, p, "coupler");
  CHECK(!r.pass);
  CHECK(r.residual > 0.1);
}

TEST_CASE("model-level hypervirial wrapper") {
  const ModelDefinition m = parse_model_file(
      std::string(HFTLAB_TEST_DATA) + "/good_full.hft");
  const HermitianMatrix w = evaluate_matrix(m, "W", 0.7);
  const ResidualReport r = check_hypervirial(m, 0.7, w, "model W", 0.0);
  CHECK(r.pass);
}

TEST_CASE("degeneracy tolerance resolution") {
  const HermitianMatrix h = HermitianMatrix::from_upper(
      1, {{0, 0, cplx(5.0, 0.0)}});
  CHECK(resolve_degeneracy_tolerance(h, 0.0) ==
        default_degeneracy_tolerance(h));
  CHECK(resolve_degeneracy_tolerance(h, -1.0) ==
        default_degeneracy_tolerance(h));
  CHECK(resolve_degeneracy_tolerance(h, 1e-6) == 1e-6);
}
