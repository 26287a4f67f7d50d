#include "stm/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stm/errors.hpp"

namespace stm {

namespace {

double norm2(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

bool all_finite(std::span<const double> v) noexcept {
    return std::all_of(v.begin(), v.end(), [](double c) { return std::isfinite(c); });
}

void check_step_args(const SdeProblem& problem, std::span<const double> x,
                     std::span<const double> dW, double h) {
    if (x.size() != problem.dim_state()) throw ParameterError("state length mismatch");
    if (dW.size() != problem.dim_noise()) throw ParameterError("increment length mismatch");
    if (!(h > 0.0)) throw ParameterError("stepsize must be positive");
}

}  // namespace

std::string_view scheme_name(SchemeKind kind) noexcept {
    switch (kind) {
        case SchemeKind::euler_maruyama: return "em";
        case SchemeKind::tamed_euler: return "tamed-euler";
        case SchemeKind::semi_tamed_euler: return "semi-tamed-euler";
        case SchemeKind::tamed_milstein: return "tamed-milstein";
        case SchemeKind::semi_tamed_milstein: return "semi-tamed-milstein";
    }
    return "?";
}

SchemeKind parse_scheme(std::string_view name) {
    for (SchemeKind kind : kAllSchemes)
        if (scheme_name(kind) == name) return kind;
    std::string msg = "unknown scheme '" + std::string(name) + "'; valid names:";
    for (SchemeKind kind : kAllSchemes) msg += " " + std::string(scheme_name(kind));
    throw LookupError(msg);
}

State tame(std::span<const double> v, double h) {
    const double denom = 1.0 + h * norm2(v);
    State out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] / denom;
    return out;
}

Stepper::Stepper(const SdeProblem& problem, SchemeKind kind)
    : problem_(problem),
      kind_(kind),
      phi_(problem.dim_state()),
      varphi_(problem.dim_state()),
      column_(problem.dim_state()),
      levy_(problem.dim_state()),
      correction_(problem.dim_state()),
      scratch_(3 * problem.dim_state()) {}

void Stepper::add_correction(std::span<const double> x, std::span<const double> dW, double h,
                             std::span<double> out) {
    const std::size_t d = problem_.dim_state();
    const std::size_t m = problem_.dim_noise();
    std::fill(correction_.begin(), correction_.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        problem_.eval_levy(x, j, j, levy_, scratch_);
        const double bracket = dW[j] * dW[j] - h;
        for (std::size_t k = 0; k < d; ++k) correction_[k] += 0.5 * levy_[k] * bracket;
    }
    // Off-diagonal pairs: 1/2 (L^{j1}g_{j2} + L^{j2}g_{j1}) = L^{j1}g_{j2} under commutativity.
    for (std::size_t j1 = 0; j1 < m; ++j1) {
        for (std::size_t j2 = j1 + 1; j2 < m; ++j2) {
            problem_.eval_levy(x, j1, j2, levy_, scratch_);
            const double product = dW[j1] * dW[j2];
            for (std::size_t k = 0; k < d; ++k) correction_[k] += levy_[k] * product;
        }
    }
    for (std::size_t k = 0; k < d; ++k) out[k] += correction_[k];
}

void Stepper::advance(std::span<const double> x, std::span<const double> dW, double h,
                      std::span<double> out) {
    const std::size_t d = problem_.dim_state();
    problem_.eval_phi(x, phi_);
    problem_.eval_varphi(x, varphi_);

    switch (kind_) {
        case SchemeKind::euler_maruyama:
            for (std::size_t k = 0; k < d; ++k) out[k] = x[k] + (phi_[k] + varphi_[k]) * h;
            break;
        case SchemeKind::tamed_euler:
        case SchemeKind::tamed_milstein: {
            for (std::size_t k = 0; k < d; ++k) phi_[k] += varphi_[k];
            const double denom = 1.0 + h * norm2(phi_);
            for (std::size_t k = 0; k < d; ++k) out[k] = x[k] + (phi_[k] / denom) * h;
            break;
        }
        case SchemeKind::semi_tamed_euler:
        case SchemeKind::semi_tamed_milstein: {
            const double denom = 1.0 + h * norm2(varphi_);
            for (std::size_t k = 0; k < d; ++k) {
                out[k] = x[k] + phi_[k] * h;
                out[k] += (varphi_[k] / denom) * h;
            }
            break;
        }
    }

    for (std::size_t j = 0; j < problem_.dim_noise(); ++j) {
        problem_.eval_diffusion(x, j, column_);
        for (std::size_t k = 0; k < d; ++k) out[k] += column_[k] * dW[j];
    }

    if (is_milstein(kind_)) add_correction(x, dW, h, out);
}

State milstein_correction(const SdeProblem& problem, std::span<const double> x,
                          std::span<const double> dW, double h) {
    check_step_args(problem, x, dW, h);
    Stepper stepper(problem, SchemeKind::semi_tamed_milstein);
    State out(problem.dim_state(), 0.0);
    stepper.add_correction(x, dW, h, out);
    return out;
}

State step(const SdeProblem& problem, SchemeKind kind, std::span<const double> x,
           std::span<const double> dW, double h) {
    check_step_args(problem, x, dW, h);
    Stepper stepper(problem, kind);
    State out(problem.dim_state());
    stepper.advance(x, dW, h, out);
    return out;
}

State step_semi_tamed_milstein(const SdeProblem& problem, std::span<const double> x,
                               std::span<const double> dW, double h) {
    return step(problem, SchemeKind::semi_tamed_milstein, x, dW, h);
}
State step_tamed_milstein(const SdeProblem& problem, std::span<const double> x,
                          std::span<const double> dW, double h) {
    return step(problem, SchemeKind::tamed_milstein, x, dW, h);
}
State step_semi_tamed_euler(const SdeProblem& problem, std::span<const double> x,
                            std::span<const double> dW, double h) {
    return step(problem, SchemeKind::semi_tamed_euler, x, dW, h);
}
State step_tamed_euler(const SdeProblem& problem, std::span<const double> x,
                       std::span<const double> dW, double h) {
    return step(problem, SchemeKind::tamed_euler, x, dW, h);
}
State step_euler_maruyama(const SdeProblem& problem, std::span<const double> x,
                          std::span<const double> dW, double h) {
    return step(problem, SchemeKind::euler_maruyama, x, dW, h);
}

void require_supported(const SdeProblem& problem, SchemeKind kind, bool allow_unverified_noise) {
    if (is_milstein(kind) && !problem.commutativity_verified() && !allow_unverified_noise) {
        throw ParameterError(std::string(scheme_name(kind)) + " needs commutative noise; '" +
                             problem.label() +
                             "' has not been verified (run check_commutativity first)");
    }
}

Trajectory integrate(const SdeProblem& problem, SchemeKind kind, const PathBundle& bundle,
                     const IntegrateOptions& options) {
    if (bundle.dim_noise() != problem.dim_noise())
        throw ParameterError("path bundle noise dimension does not match the problem");
    require_supported(problem, kind, options.allow_unverified_noise);

    const std::size_t d = problem.dim_state();
    const std::size_t steps = bundle.steps();
    const double T = bundle.horizon();
    const double h = T / static_cast<double>(steps);

    Trajectory traj;
    traj.dim = d;
    const std::size_t rows = options.record_full ? steps + 1 : 2;
    traj.states.assign(rows * d, std::numeric_limits<double>::quiet_NaN());
    traj.times.resize(rows);
    if (options.record_full) {
        for (std::size_t n = 0; n < steps; ++n) traj.times[n] = static_cast<double>(n) * h;
    } else {
        traj.times[0] = 0.0;
    }
    traj.times[rows - 1] = T;
    std::copy(problem.initial_value().begin(), problem.initial_value().end(), traj.states.begin());

    Stepper stepper(problem, kind);
    std::vector<double> current(problem.initial_value());
    std::vector<double> next(d);
    for (std::size_t n = 0; n < steps; ++n) {
        stepper.advance(current, bundle.row(n), h, next);
        if (!all_finite(next)) {
            traj.blew_up = true;
            traj.blowup_step = n;
            return traj;
        }
        current.swap(next);
        if (options.record_full)
            std::copy(current.begin(), current.end(), traj.states.begin() + (n + 1) * d);
    }
    if (!options.record_full) std::copy(current.begin(), current.end(), traj.states.begin() + d);
    return traj;
}

}  // namespace stm
