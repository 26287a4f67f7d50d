#include "stm/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stm/errors.hpp"

namespace stm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (m^2 / 4)(m^2 + m) beta
double levy_growth(const StabilityParams& p) {
    const double m = static_cast<double>(p.m);
    return (m * m / 4.0) * (m * m + m) * p.beta;
}

double ratio_or_inf(double num, double den) { return den == 0.0 ? kInf : num / den; }

}  // namespace

void validate(const StabilityParams& p) {
    std::ostringstream msg;
    if (!(p.rho > 0.0)) msg << "rho must be positive; ";
    if (!(p.theta >= 0.0)) msg << "theta must be nonnegative; ";
    if (!(p.lip_K >= 0.0)) msg << "K must be nonnegative; ";
    if (!(p.beta >= 0.0)) msg << "beta must be nonnegative; ";
    if (!(p.v > 0.0)) msg << "v must be positive; ";
    if (!(p.v_bar > 0.0)) msg << "v_bar must be positive; ";
    if (!(p.alpha > 1.0)) msg << "alpha must exceed 1; ";
    if (p.m < 1) msg << "m must be >= 1; ";
    if (!(2.0 * p.rho > p.theta * p.theta)) msg << "need 2 rho > theta^2; ";
    if (!(2.0 * p.v > p.v_bar)) msg << "need 2 v > v_bar; ";
    const std::string text = msg.str();
    if (!text.empty()) throw ParameterError("invalid stability parameters: " + text.substr(0, text.size() - 2));
}

StabilityThreshold stability_threshold(const StabilityParams& p) {
    validate(p);
    StabilityThreshold t;
    const double first = ratio_or_inf(2.0 * p.v - p.v_bar, 2.0 * p.lip_K * p.v);
    const double second = ratio_or_inf(2.0 * p.v, (2.0 * p.lip_K + p.v_bar) * p.v_bar);
    t.h1 = std::min(first, second);
    t.h2 = ratio_or_inf(2.0 * p.rho - p.theta * p.theta, levy_growth(p) + p.lip_K);
    t.h_star = std::min(t.h1, t.h2);
    return t;
}

double decay_rate_formula(const StabilityParams& p, double h) {
    return (2.0 * p.rho - p.theta * p.theta) - (p.lip_K + levy_growth(p)) * h;
}

double decay_rate(const StabilityParams& p, double h) {
    const StabilityThreshold t = stability_threshold(p);
    if (!(h > 0.0) || !(h < t.h_star)) {
        std::ostringstream msg;
        msg << "decay rate needs 0 < h < h* = " << t.h_star << " (got h = " << h << ")";
        throw ParameterError(msg.str());
    }
    return decay_rate_formula(p, h);
}

StabilityParams ginzburg_landau_stable_params() {
    StabilityParams p;
    p.rho = 2.0;
    p.theta = std::sqrt(2.0);
    p.lip_K = 2.0;
    p.beta = 2.0;
    p.v = 1.0;
    p.v_bar = 1.0;
    p.alpha = 5.0;
    p.m = 1;
    return p;
}

DissipativityReport check_dissipativity(const SdeProblem& problem, double gamma,
                                        std::span<const State> sample_points,
                                        double tolerance_scale) {
    if (sample_points.empty()) throw ParameterError("sample_points must be nonempty");
    DissipativityReport report;
    report.sample_count = sample_points.size();
    report.margin = -kInf;
    State column(problem.dim_state());
    for (const State& x : sample_points) {
        const State f = drift_full(problem, x);
        double inner = 0.0, xx = 0.0, gg = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            inner += x[k] * f[k];
            xx += x[k] * x[k];
        }
        for (std::size_t j = 0; j < problem.dim_noise(); ++j) {
            problem.eval_diffusion(x, j, column);
            for (double c : column) gg += c * c;
        }
        const double value = 2.0 * inner + gg + gamma * xx;
        if (!std::isfinite(value)) throw EvaluationError("dissipativity expression is not finite");
        if (value > tolerance_scale * (1.0 + xx)) report.passed = false;
        if (value > report.margin) {
            report.margin = value;
            report.worst_point = x;
        }
    }
    return report;
}

StabilityReport stability_study(const SdeProblem& problem, const StabilityParams& params,
                                std::span<const SchemeKind> schemes,
                                std::span<const double> stepsizes, std::size_t paths,
                                std::uint64_t seed, unsigned threads) {
    StabilityReport report;
    report.threshold = stability_threshold(params);
    report.gamma_of_h = [params](double h) { return decay_rate_formula(params, h); };
    for (SchemeKind s : schemes)
        for (double h : stepsizes)
            report.curves.emplace(std::pair{s, h},
                                  mean_square_curve(problem, s, h, paths, seed, threads));
    return report;
}

}  // namespace stm
