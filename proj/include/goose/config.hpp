#pragma once

#include "goose/experiment.hpp"

#include <filesystem>
#include <string>

namespace goose {

/// Parses a JSON experiment description. Unknown keys and type mismatches
/// raise ConfigError naming the field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);

}  // namespace goose
