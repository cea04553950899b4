#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scramble/experiments/config.hpp"
#include "scramble/quantum_state.hpp"

namespace scramble::experiments {

/// Worker count: explicit flag, then SCRAMBLESIM_WORKERS, then the config,
/// then the hardware concurrency.
unsigned resolve_workers(std::optional<unsigned> flag, const ExperimentConfig& config);

/// "x", "-z", "random" (drawn from a stream derived from the seed and the
/// field name) or [x, y, z].
BlochAxis resolve_axis(const ExperimentConfig& config, const std::string& field);

struct RunResult {
  std::vector<std::filesystem::path> outputs;
  std::filesystem::path manifest;
};

/// Runs the experiment and writes its CSV/JSON files under config.output,
/// followed by the manifest.
RunResult run(const ExperimentConfig& config, unsigned workers);

}  // namespace scramble::experiments
