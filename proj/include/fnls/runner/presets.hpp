#pragma once

#include <string>
#include <vector>

#include "fnls/runner/config.hpp"

namespace fnls::runner {

/// Names of the built-in scenarios, in a fixed order.
std::vector<std::string> list_presets();

/// YAML source of a preset. Throws ValidationError for unknown names.
const std::string& preset_yaml(const std::string& name);

SimulationConfig preset_config(const std::string& name, const std::vector<std::string>& overrides = {});

}  // namespace fnls::runner
