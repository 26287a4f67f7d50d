#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stm/model.hpp"
#include "stm/rng_paths.hpp"
#include "stm/schemes.hpp"

namespace stm {

struct PowerLawFit {
    double constant = 0.0;  // C
    double order = 0.0;     // r
    double residual = 0.0;  // Euclidean norm of log-space residuals
};

/// Least squares fit of log e = log C + r log h. Needs >= 2 points, all
/// strictly positive, and at least two distinct stepsizes.
PowerLawFit fit_power_law(std::span<const double> stepsizes, std::span<const double> errors);

enum class ErrorNorm {
    terminal,       // ||X_T - Y_N||
    sup_over_grid,  // max_n ||X_{t_n} - Y_n|| over the coarse grid
};

struct StudyOptions {
    unsigned threads = 1;
    ErrorNorm norm = ErrorNorm::terminal;
    /// When set, replaces the fine-grid reference run: maps the fine bundle to
    /// the exact terminal value X_T. Only valid with ErrorNorm::terminal.
    std::function<State(const PathBundle& fine)> exact_terminal;
    bool allow_unverified_noise = false;
};

struct ConvergenceReport {
    SchemeKind scheme = SchemeKind::semi_tamed_milstein;
    std::vector<double> stepsizes;        // strictly decreasing
    std::vector<double> rms_errors;       // (E||X - Y||^2)^{1/2} over surviving paths
    std::vector<double> standard_errors;  // delta-method standard error of each rms estimate
    std::vector<std::size_t> blown_up;    // study trajectories that blew up, per stepsize
    std::size_t paths = 0;
    std::size_t reference_steps = 0;
    std::size_t reference_excluded = 0;   // paths whose reference run blew up
    /// Absent when fewer than two stepsizes have a positive rms error.
    std::optional<PowerLawFit> fit;

    /// Paths left out of the rms at stepsize index i.
    std::size_t excluded_paths(std::size_t i) const { return reference_excluded + blown_up[i]; }
};

/// Coupled-path strong error study for several schemes at once. Every path
/// draws one fine bundle with `reference_steps` steps; the reference scheme is
/// integrated on it and each study scheme on its coarsenings. All schemes see
/// the same driving noise.
std::vector<ConvergenceReport> strong_error_study(const SdeProblem& problem,
                                                  std::span<const SchemeKind> schemes,
                                                  std::span<const double> stepsizes,
                                                  std::size_t paths, std::size_t reference_steps,
                                                  SchemeKind reference_scheme, std::uint64_t seed,
                                                  const StudyOptions& options = {});

ConvergenceReport strong_error_study(const SdeProblem& problem, SchemeKind scheme,
                                     std::span<const double> stepsizes, std::size_t paths,
                                     std::size_t reference_steps, SchemeKind reference_scheme,
                                     std::uint64_t seed, const StudyOptions& options = {});

/// Number of steps N = T / h. Throws ParameterError unless N is a positive
/// integer up to rounding.
std::size_t steps_for(double horizon, double h);

struct MeanSquareCurve {
    SchemeKind scheme = SchemeKind::semi_tamed_milstein;
    double stepsize = 0.0;
    std::vector<double> times;
    std::vector<double> mean_square;     // E||Y_n||^2 over surviving paths
    std::vector<double> standard_error;  // standard error of each entry
    std::size_t paths = 0;
    std::size_t blown_up = 0;            // paths left out (non-finite state or ||Y||^2)
};

/// Empirical E||Y_n||^2 at every gridpoint n = 0..N of the grid with stepsize h.
MeanSquareCurve mean_square_curve(const SdeProblem& problem, SchemeKind scheme, double h,
                                  std::size_t paths, std::uint64_t seed, unsigned threads = 1,
                                  bool allow_unverified_noise = false);

struct MomentBound {
    double max_moment = 0.0;           // max_n of the empirical E||Y_n||^p
    std::size_t argmax_step = 0;
    std::vector<double> moments;       // E||Y_n||^p, n = 0..N
    std::size_t blown_up = 0;
};

/// Running maximum of the empirical p-th moment; p must be 2, 4 or 6.
MomentBound empirical_moment_bound(const SdeProblem& problem, SchemeKind scheme, double h,
                                   std::size_t paths, int p, std::uint64_t seed,
                                   unsigned threads = 1);

}  // namespace stm
