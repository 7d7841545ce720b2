#include "hftlab/builtins.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace hftlab {

namespace {

// Two levels that trade order at lambda = 0: a true crossing with a
// doubly degenerate point.
const char* kCrossing = R"(# levels +lambda and -lambda cross at 0
matrix H {
  dim = 2;
  [1,1] = lambda;
  [2,2] = -lambda;
}
)";

// The same two levels with a constant coupling: the gap closes to 1 but
// never to zero, so no degeneracy ever forms.
const char* kAvoided = R"(# coupled two-level system, gap min 1 at lambda = 0
matrix H {
  dim = 2;
  [1,1] = lambda;
  [1,2] = 0.5;
  [2,2] = -lambda;
}
)";

// Three equally spaced levels collapsing at lambda = 0: a triply
// degenerate point.
const char* kSpin1 = R"(# levels +lambda, 0, -lambda meet at 0
matrix H {
  dim = 3;
  [1,1] = lambda;
  [2,2] = 0;
  [3,3] = -lambda;
}
)";

// A pair of levels that stay degenerate for every lambda, plus a third
// that crosses them at 0.
const char* kPersistent = R"(# doubly degenerate branch +lambda alongside -lambda
matrix H {
  dim = 3;
  [1,1] = lambda;
  [2,2] = lambda;
  [3,3] = -lambda;
}
)";

// lambda times a fixed rank-one projector: eigenvalues {0, lambda} with
// lambda-independent eigenvectors, a clean slope benchmark.
const char* kRotating = R"(# lambda * projector onto (cos 1, sin 1)
matrix H {
  dim = 2;
  [1,1] = lambda*cos(1)^2;
  [1,2] = lambda*cos(1)*sin(1);
  [2,2] = lambda*sin(1)^2;
}
)";

const std::map<std::string, const char*>& table() {
  static const std::map<std::string, const char*> t = {
      {"crossing", kCrossing},     {"avoided", kAvoided},
      {"spin1", kSpin1},           {"persistent", kPersistent},
      {"rotating", kRotating},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "crossing", "avoided", "spin1", "persistent", "rotating"};
  return names;
}

const std::string& builtin_source(const std::string& name) {
  static std::map<std::string, std::string> cache;
  auto it = table().find(name);
  if (it == table().end()) {
    std::ostringstream os;
    os << "unknown builtin model '" << name << "'; available:";
    for (const auto& n : builtin_names()) os << " " << n;
    throw std::invalid_argument(os.str());
  }
  return cache.emplace(name, it->second).first->second;
}

ModelDefinition builtin_model(const std::string& name) {
  return parse_model(builtin_source(name));
}

}  // namespace hftlab
