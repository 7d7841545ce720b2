#pragma once

#include <string>
#include <vector>

#include "hftlab/model.hpp"

namespace hftlab {

/// Names of the bundled demonstration models, in presentation order.
const std::vector<std::string>& builtin_names();

/// Source text of a bundled model, exactly as it would appear in a file.
/// Throws std::invalid_argument for an unknown name.
const std::string& builtin_source(const std::string& name);

/// Parse a bundled model. Throws std::invalid_argument for an unknown name.
ModelDefinition builtin_model(const std::string& name);

}  // namespace hftlab
