#pragma once

// Experiment configuration documents (JSON). Top-level keys:
//   H, T, n, x0, drift, tube {lower, upper}, kernel, epsilons, bandwidth,
//   replications, seed, eval_times, increment_convention
// Missing keys take the ExperimentConfig defaults; unknown keys are errors.

#include "rfsde/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rfsde {

struct LoadedConfig {
    ExperimentConfig config;
    /// Normalized document (all keys, defaults filled in), serialized
    /// compactly; hashed into the run manifest.
    std::string canonical;
    std::vector<std::string> warnings;
};

/// Throws ConfigError naming the offending key, file or DSL offset.
LoadedConfig parse_config(const std::string& json_text);
LoadedConfig load_config(const std::filesystem::path& path);

} // namespace rfsde
