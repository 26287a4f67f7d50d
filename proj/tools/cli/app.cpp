#include "app.hpp"

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "runner.hpp"
#include "stm/errors.hpp"
#include "stm/model.hpp"

namespace stm::cli {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tamed and semi-tamed Euler/Milstein experiments for SDEs"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> out_dir;
    std::optional<unsigned> threads;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--paths", paths, "override the number of Monte Carlo paths")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "override the output directory");
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);

    std::optional<ExperimentKind> kind;
    for (auto k : {ExperimentKind::converge, ExperimentKind::stability, ExperimentKind::simulate,
                   ExperimentKind::threshold, ExperimentKind::check}) {
        static const char* const help[] = {"strong convergence study", "mean-square stability curves",
                                           "sample trajectories", "stepsize threshold and decay rate",
                                           "commutativity and dissipativity checks"};
        auto* sub = app.add_subcommand(std::string(kind_name(k)), help[static_cast<int>(k)]);
        sub->fallthrough();
        sub->callback([&kind, k] { kind = k; });
    }
    auto* list = app.add_subcommand("list-models", "print the built-in model names");
    list->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    if (list->parsed()) {
        for (const auto& name : builtin_problem_names()) out << name << '\n';
        return kSuccess;
    }
    if (config_path.empty()) {
        err << "error: --config is required for '" << kind_name(*kind) << "'\n";
        return kConfigError;
    }

    Overrides overrides;
    overrides.seed = seed;
    overrides.paths = paths;
    if (out_dir) overrides.output_dir = *out_dir;
    overrides.threads = threads;

    ExperimentConfig config;
    try {
        config = load_config(config_path, *kind, overrides);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        run_experiment(config, out);
    } catch (const ParameterError& e) {
        // Reached only for combinations the parser cannot see in isolation.
        err << "config error: " << config_path << ": " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kSuccess;
}

}  // namespace stm::cli
