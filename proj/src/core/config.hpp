#pragma once

#include <stdexcept>
#include <string>

#include "core/engine.hpp"

namespace llab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse an experiment description.  The format is strict on purpose: a typo in
// a field name aborts instead of silently running the default physics.  Angles
// are degrees in the file and radians in memory.  Throws ConfigError with a
// message naming the offending field.
ExperimentConfig parse_experiment_config(const std::string& json_text);

// Round-trip helper used by the CLI to echo the effective configuration.
std::string experiment_config_to_json(const ExperimentConfig& config);

inline constexpr int kConfigSchemaVersion = 1;

}  // namespace llab
