#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hftlab/expr.hpp"
#include "hftlab/hermitian.hpp"

namespace hftlab {

struct SourceLocation {
  int line = 1;    // 1-based
  int column = 1;  // 1-based
};

/// Syntax or structural error in a model file. Carries the offending
/// location; what() includes "line L, column C".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, SourceLocation where);
  SourceLocation where() const { return where_; }

 private:
  SourceLocation where_;
};

/// One declared upper-triangle entry, 1-based indices with row <= col.
struct MatrixEntry {
  int row = 0;
  int col = 0;
  Expr value;
};

/// A named parametric Hermitian matrix family, e.g. H or W.
struct MatrixFamily {
  std::string name;
  int dim = 0;
  std::vector<MatrixEntry> entries;  // upper triangle only
};

/// A parsed model: one or more matrix families over a shared dimension.
/// A family named "H" is always present.
struct ModelDefinition {
  int dimension = 0;
  std::vector<MatrixFamily> families;

  const MatrixFamily* find(std::string_view name) const;
  const MatrixFamily& hamiltonian() const;  // the family named "H"
};

/// Parse model text. Grammar:
///   file  := decl+
///   decl  := "matrix" IDENT "{" "dim" "=" INT ";" entry* "}"
///   entry := "[" INT "," INT "]" "=" expr ";"
///   expr  := term (("+"|"-") term)*
///   term  := factor (("*"|"/") factor)*
///   factor:= base ("^" INT)?
///   base  := NUMBER | "i" | "lambda" | IDENT "(" expr ")" | "(" expr ")"
///          | "-" base
/// Unary minus binds tighter than "^": -lambda^2 parses as (-lambda)^2.
/// Functions: sin cos exp sqrt ln. "#" starts a comment to end of line.
/// Entries use 1-based indices and must satisfy row <= col; diagonal entries
/// must evaluate to real values (checked at evaluation time).
ModelDefinition parse_model(std::string_view text);

/// Read the file at path and parse it.
ModelDefinition parse_model_file(const std::filesystem::path& path);

/// Evaluate a family at lambda. Diagonal entries whose imaginary part exceeds
/// 1e-12 * (1 + |real part|) raise EvalError; smaller imaginary dirt is
/// truncated. Off-diagonal entries are mirrored by conjugation.
HermitianMatrix evaluate_matrix(const MatrixFamily& family, double lambda);

/// Same, for the entrywise lambda-derivative of the family.
HermitianMatrix evaluate_derivative(const MatrixFamily& family, double lambda);

/// Name-addressed forms; EvalError on an unknown matrix name.
HermitianMatrix evaluate_matrix(const ModelDefinition& m,
                                std::string_view name, double lambda);
HermitianMatrix evaluate_derivative(const ModelDefinition& m,
                                    std::string_view name, double lambda);

}  // namespace hftlab
