#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "stm/analysis.hpp"
#include "stm/model.hpp"
#include "stm/schemes.hpp"
#include "stm/stability.hpp"

namespace stm::cli {

/// Invalid configuration. what() is "<source>:<line>: <message>" when the
/// offending key could be located.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { converge, stability, simulate, threshold, check };

std::string_view kind_name(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> parse_kind(std::string_view name) noexcept;

/// dX = aX dt + bX dW, the one user model that can be declared inline.
struct LinearModel {
    double a = 0.0;
    double b = 0.0;
    double x0 = 1.0;
};

using ModelSpec = std::variant<std::string, LinearModel>;

struct SampleRange {
    double lo = -3.0;
    double hi = 3.0;
    std::size_t count = 101;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::converge;
    std::optional<ModelSpec> model;
    std::vector<SchemeKind> schemes;
    std::vector<double> stepsizes;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon;
    std::filesystem::path output_dir = "out";
    unsigned threads = 1;
    std::optional<StabilityParams> stability_params;

    // converge
    std::optional<std::size_t> reference_steps;
    std::optional<SchemeKind> reference_scheme;  // empty with exact_reference
    bool exact_reference = false;
    ErrorNorm error_norm = ErrorNorm::terminal;
    bool plot = false;

    // simulate
    std::vector<std::uint64_t> path_indices{0};
    bool dump_paths = false;

    // threshold
    std::vector<double> gamma_at;

    // check
    std::vector<State> sample_points;
    std::optional<SampleRange> sample_range;
    std::optional<double> gamma;
    std::optional<double> commutativity_tolerance;
};

/// Command line values that take precedence over the file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::filesystem::path> output_dir;
    std::optional<unsigned> threads;
};

/// Strict parse: unknown keys, wrong types and missing kind-specific fields
/// are errors. When the document has a "kind" it must equal `expected`.
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              ExperimentKind expected, const Overrides& overrides = {});

ExperimentConfig load_config(const std::filesystem::path& file, ExperimentKind expected,
                             const Overrides& overrides = {});

/// "2^-a..2^-b" -> {2^-a, ..., 2^-b}, inclusive, either direction.
std::vector<double> parse_exponent_range(const std::string& text);

/// Resolves the model and applies the horizon override.
SdeProblem resolve_model(const ExperimentConfig& config);

}  // namespace stm::cli
