#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "config.hpp"

namespace stm::cli {

struct RunResult {
    std::vector<std::filesystem::path> files;  // in the order they were written
};

/// Runs the experiment and writes its artifacts under config.output_dir.
/// Progress lines go to `log`. Model and evaluation failures propagate as
/// stm::EvaluationError / ParameterError.
RunResult run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace stm::cli
