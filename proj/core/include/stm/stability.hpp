#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "stm/analysis.hpp"
#include "stm/model.hpp"
#include "stm/schemes.hpp"

namespace stm {

/// Constants of the mean-square stability hypotheses:
///   <x - y, phi(x) - phi(y)> <= -rho ||x - y||^2,   ||phi(x) - phi(y)|| <= K ||x - y||
///   <x, varphi(x)> <= -v ||x||^{alpha+1},            ||varphi(x)|| <= v_bar ||x||^alpha
///   ||g(x) - g(y)|| <= theta ||x - y||,              ||L^j g_i(x) - L^j g_i(y)|| <= beta ||x - y||
/// with phi(0) = varphi(0) = g(0) = 0.
struct StabilityParams {
    double rho = 0.0;
    double theta = 0.0;
    double lip_K = 0.0;
    double beta = 0.0;
    double v = 0.0;
    double v_bar = 0.0;
    double alpha = 0.0;
    std::size_t m = 1;
};

/// Throws ParameterError unless rho, v, v_bar > 0, theta, K, beta >= 0,
/// alpha > 1, m >= 1, 2 rho > theta^2 and 2 v > v_bar.
void validate(const StabilityParams& params);

struct StabilityThreshold {
    double h_star = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;  // +inf when K = beta = 0
};

/// h1 = min((2v - v_bar) / (2 K v), 2v / ((2K + v_bar) v_bar)),
/// h2 = (2 rho - theta^2) / ((m^2/4)(m^2 + m) beta + K),
/// h_star = min(h1, h2). Divisions by zero yield +inf for that branch.
StabilityThreshold stability_threshold(const StabilityParams& params);

/// gamma_h = (2 rho - theta^2) - (K + (m^2/4)(m^2 + m) beta) h for any h,
/// without the h < h_star precondition.
double decay_rate_formula(const StabilityParams& params, double h);

/// decay_rate_formula() restricted to 0 < h < h_star; ParameterError otherwise.
double decay_rate(const StabilityParams& params, double h);

/// Ginzburg-Landau stable example: rho = 2, theta = sqrt 2, K = 2, beta = 2,
/// v = 1, v_bar = 1, alpha = 5, m = 1.
StabilityParams ginzburg_landau_stable_params();

struct DissipativityReport {
    bool passed = true;
    double margin = 0.0;  // max over samples of 2<x, f(x)> + ||g(x)||_F^2 + gamma ||x||^2
    State worst_point;
    std::size_t sample_count = 0;
};

/// Samples 2<x, f(x)> + ||g(x)||^2 + gamma ||x||^2 <= tol (1 + ||x||^2) with
/// tol = tolerance_scale (default 1e-10).
DissipativityReport check_dissipativity(const SdeProblem& problem, double gamma,
                                        std::span<const State> sample_points,
                                        double tolerance_scale = 1e-10);

struct StabilityReport {
    StabilityThreshold threshold;
    std::function<double(double)> gamma_of_h;
    std::map<std::pair<SchemeKind, double>, MeanSquareCurve> curves;
};

/// Threshold analysis plus empirical second-moment curves for every
/// (scheme, stepsize) pair. All curves use the same seed.
StabilityReport stability_study(const SdeProblem& problem, const StabilityParams& params,
                                std::span<const SchemeKind> schemes,
                                std::span<const double> stepsizes, std::size_t paths,
                                std::uint64_t seed, unsigned threads = 1);

}  // namespace stm
