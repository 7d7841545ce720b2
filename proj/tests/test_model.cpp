#include <cmath>
#include <string>

#include "doctest.h"
#include "hftlab/model.hpp"

using namespace hftlab;

namespace {

const std::string kDataDir = HFTLAB_TEST_DATA;

ParseError capture(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error for: ", text);
  return ParseError("unreachable", {0, 0});
}

}  // namespace

TEST_CASE("full model file parses with all families") {
  const ModelDefinition m = parse_model_file(kDataDir + "/good_full.hft");
  CHECK(m.dimension == 2);
  CHECK(m.families.size() == 3);
  REQUIRE(m.find("H") != nullptr);
  REQUIRE(m.find("W") != nullptr);
  REQUIRE(m.find("A") != nullptr);
  CHECK(m.find("X") == nullptr);
  CHECK(&m.hamiltonian() == m.find("H"));

  const HermitianMatrix h = evaluate_matrix(m, "H", 0.7);
  CHECK(h.mat()(0, 0) == cplx(0.7, 0.0));
  CHECK(h.mat()(1, 1) == cplx(-0.7, 0.0));
  const HermitianMatrix w = evaluate_matrix(m, "W", 0.7);
  CHECK(w.mat()(0, 0) == cplx(2.0, 0.0));
  CHECK_THROWS_AS(evaluate_matrix(m, "nope", 0.7), EvalError);
}

TEST_CASE("complex couplings are mirrored by conjugation") {
  const ModelDefinition m = parse_model_file(kDataDir + "/complex_pair.hft");
  const HermitianMatrix h = evaluate_matrix(m.hamiltonian(), 0.3);
  CHECK(h.mat()(0, 1) == cplx(0.25, 0.25));
  CHECK(h.mat()(1, 0) == cplx(0.25, -0.25));
}

TEST_CASE("evaluated matrices are exactly Hermitian over a grid") {
  const ModelDefinition m = parse_model_file(kDataDir + "/complex_pair.hft");
  for (int k = 0; k <= 40; ++k) {
    const double l = -2.0 + 0.1 * k;
    const Eigen::MatrixXcd mat = evaluate_matrix(m.hamiltonian(), l).mat();
    CHECK(max_abs(mat - mat.adjoint()) == 0.0);
    const Eigen::MatrixXcd dm =
        evaluate_derivative(m.hamiltonian(), l).mat();
    CHECK(max_abs(dm - dm.adjoint()) == 0.0);
  }
}

TEST_CASE("entrywise derivative of a family") {
  const ModelDefinition m = parse_model_file(kDataDir + "/good_full.hft");
  const HermitianMatrix da = evaluate_derivative(m, "A", 0.4);
  CHECK(da.mat()(0, 0).real() == doctest::Approx(2 * 0.4 + 1));
  CHECK(da.mat()(1, 1).real() == doctest::Approx(2 * 0.4 - 1));
  const HermitianMatrix dw = evaluate_derivative(m, "W", 0.4);
  CHECK(dw.max_abs_entry() == 0.0);
}

TEST_CASE("unary minus binds tighter than the power operator") {
  const ModelDefinition m =
      parse_model("matrix H { dim = 1; [1,1] = -lambda^2; }");
  // (-lambda)^2, not -(lambda^2)
  CHECK(evaluate_matrix(m.hamiltonian(), 3.0).mat()(0, 0).real() ==
        doctest::Approx(9.0));
}

TEST_CASE("expression grammar corners") {
  const ModelDefinition m = parse_model(
      "matrix H { dim = 1;\n"
      "  [1,1] = 2.5e-1 * lambda + sin(lambda)^2 + cos(lambda)^2\n"
      "          - (1 - lambda)/(2 + lambda^2); # comment\n"
      "}\n");
  const double l = 0.9;
  const double expect = 0.25 * l + 1.0 - (1 - l) / (2 + l * l);
  CHECK(evaluate_matrix(m.hamiltonian(), l).mat()(0, 0).real() ==
        doctest::Approx(expect));
}

TEST_CASE("rendered expressions re-parse to the same function") {
  const ModelDefinition m = parse_model(
      "matrix H { dim = 1;\n"
      "  [1,1] = -lambda^3 + exp(-lambda)*sin(2*lambda) - 1/(lambda + 4);\n"
      "}\n");
  const Expr& original = m.hamiltonian().entries.at(0).value;
  const std::string rendered = original.to_string();
  const ModelDefinition m2 =
      parse_model("matrix H { dim = 1; [1,1] = " + rendered + "; }");
  const Expr& reparsed = m2.hamiltonian().entries.at(0).value;
  for (double l : {-1.5, -0.2, 0.0, 0.8, 2.0}) {
    CHECK(std::abs(original.evaluate(l) - reparsed.evaluate(l)) <= 1e-15);
  }
}

TEST_CASE("diagonal entries must evaluate real") {
  const ModelDefinition m =
      parse_model("matrix H { dim = 1; [1,1] = i*lambda; }");
  CHECK_THROWS_AS(evaluate_matrix(m.hamiltonian(), 0.5), EvalError);
  // ... but zero imaginary part is fine even when written with i
  const ModelDefinition ok =
      parse_model("matrix H { dim = 1; [1,1] = i*lambda*0; }");
  CHECK(evaluate_matrix(ok.hamiltonian(), 0.5).mat()(0, 0) ==
        cplx(0.0, 0.0));
}

TEST_CASE("syntax errors carry line and column") {
  {
    const ParseError e = capture("matrx H { dim = 2; }");
    CHECK(e.where().line == 1);
    CHECK(e.where().column == 1);
    CHECK(std::string(e.what()).find("line 1, column 1") !=
          std::string::npos);
  }
  {
    // line 3: entry cut off before the terminating ';'
    const ParseError e =
        capture("matrix H {\n  dim = 2;\n  [1,1] = lambda +;\n}");
    CHECK(e.where().line == 3);
    CHECK(std::string(e.what()).find("expected an expression") !=
          std::string::npos);
  }
  {
    const ParseError e = capture("matrix H { dim = 2; [1,1] = 3 @ 4; }");
    CHECK(std::string(e.what()).find("unexpected character '@'") !=
          std::string::npos);
    CHECK(e.where().line == 1);
  }
  {
    const ParseError e = capture("");
    CHECK(std::string(e.what()).find("empty model") != std::string::npos);
  }
}

TEST_CASE("structural errors carry locations and guidance") {
  // lower-triangle entry: the message teaches the convention
  {
    const ParseError e =
        capture("matrix H { dim = 2; [2,1] = lambda; }");
    CHECK(std::string(e.what()).find("conjugation") != std::string::npos);
  }
  {
    const ParseError e = capture("matrix H { dim = 2; [1,3] = lambda; }");
    CHECK(std::string(e.what()).find("outside 1..2") != std::string::npos);
  }
  {
    const ParseError e =
        capture("matrix H { dim = 2; [1,1] = 1; [1,1] = 2; }");
    CHECK(std::string(e.what()).find("declared twice") != std::string::npos);
  }
  {
    const ParseError e = capture(
        "matrix H { dim = 2; }\nmatrix H { dim = 2; }");
    CHECK(std::string(e.what()).find("duplicate matrix name") !=
          std::string::npos);
    CHECK(e.where().line == 2);
  }
  {
    const ParseError e = capture(
        "matrix H { dim = 2; }\nmatrix W { dim = 3; }");
    CHECK(std::string(e.what()).find("dim 3") != std::string::npos);
    CHECK(e.where().line == 2);
  }
  {
    const ParseError e = capture("matrix W { dim = 2; }");
    CHECK(std::string(e.what()).find("matrix named 'H'") !=
          std::string::npos);
  }
  {
    const ParseError e =
        capture("matrix H { dim = 2; [1,2] = mu; }");
    CHECK(std::string(e.what()).find("unknown identifier 'mu'") !=
          std::string::npos);
  }
  {
    const ParseError e = capture("matrix H { dim = 0; }");
    CHECK(std::string(e.what()).find("[1, 4096]") != std::string::npos);
  }
}

TEST_CASE("missing files are reported") {
  CHECK_THROWS_AS(parse_model_file(kDataDir + "/no_such_file.hft"),
                  EvalError);
}
