#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace stm {

using State = std::vector<double>;

/// Vector field x -> out, both of length dim_state.
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

/// j-th column of the diffusion matrix, g_j(x). Noise indices are 0-based.
using DiffusionColumn =
    std::function<void(std::span<const double> x, std::size_t j, std::span<double> out)>;

/// L^{j1} g_{j2}(x) = Dg_{j2}(x) g_{j1}(x). Noise indices are 0-based.
using LevyProduct = std::function<void(std::span<const double> x, std::size_t j1,
                                       std::size_t j2, std::span<double> out)>;

struct CommutativityReport {
    double max_violation = 0.0;
    std::size_t sample_count = 0;
    bool passed = true;
    double tolerance = 0.0;
};

/// Autonomous Ito SDE  dX = (phi(X) + varphi(X)) dt + sum_j g_j(X) dW^j  on [0, T].
///
/// phi is the globally Lipschitz drift part, varphi the superlinearly growing
/// part that the semi-tamed schemes tame. The split is declared by the user;
/// nothing here checks that phi is actually Lipschitz or that the total drift
/// is one-sided Lipschitz. Those remain modelling hypotheses.
///
/// Values are immutable once built and can be shared across threads.
class SdeProblem {
public:
    class Builder;

    std::size_t dim_state() const noexcept { return dim_state_; }
    std::size_t dim_noise() const noexcept { return dim_noise_; }
    double horizon() const noexcept { return horizon_; }
    const State& initial_value() const noexcept { return initial_value_; }
    const std::string& label() const noexcept { return label_; }
    double fd_relative_step() const noexcept { return fd_relative_step_; }
    bool has_closed_form_levy() const noexcept { return static_cast<bool>(levy_); }

    /// True when dim_noise == 1 or commutativity was confirmed with
    /// verified_commutative(). Milstein schemes refuse other problems.
    bool commutativity_verified() const noexcept {
        return dim_noise_ == 1 || commutativity_verified_;
    }

    // Raw coefficient evaluation into caller buffers; no finiteness checks.
    void eval_phi(std::span<const double> x, std::span<double> out) const { phi_(x, out); }
    void eval_varphi(std::span<const double> x, std::span<double> out) const { varphi_(x, out); }
    void eval_diffusion(std::span<const double> x, std::size_t j, std::span<double> out) const {
        diffusion_(x, j, out);
    }
    /// L^{j1}g_{j2}(x): closed form when supplied, central differences otherwise.
    /// `scratch` must hold at least 3 * dim_state doubles when no closed form exists.
    void eval_levy(std::span<const double> x, std::size_t j1, std::size_t j2,
                   std::span<double> out, std::span<double> scratch) const;

    /// Copy with the horizon replaced.
    SdeProblem with_horizon(double horizon) const;

    /// Copy flagged as commutative. Throws ParameterError if the report failed.
    SdeProblem verified_commutative(const CommutativityReport& report) const;

    /// Copy with the closed-form L^{j1}g_{j2} removed so the finite-difference
    /// fallback is used.
    SdeProblem without_closed_form_levy() const;

private:
    SdeProblem() = default;

    std::size_t dim_state_ = 0;
    std::size_t dim_noise_ = 0;
    VectorField phi_;
    VectorField varphi_;
    DiffusionColumn diffusion_;
    LevyProduct levy_;
    State initial_value_;
    double horizon_ = 0.0;
    double fd_relative_step_ = 1e-6;
    std::string label_;
    bool commutativity_verified_ = false;
};

class SdeProblem::Builder {
public:
    Builder(std::size_t dim_state, std::size_t dim_noise);

    Builder& phi(VectorField f);
    Builder& varphi(VectorField f);
    Builder& diffusion(DiffusionColumn g);
    Builder& levy_product(LevyProduct lg);
    Builder& initial_value(State x0);
    Builder& horizon(double T);
    Builder& label(std::string name);
    Builder& fd_relative_step(double eta);

    /// Missing drift parts default to zero. Throws ParameterError on
    /// inconsistent dimensions, a missing diffusion, or horizon <= 0.
    SdeProblem build() const;

private:
    SdeProblem p_;
};

/// f(x) = phi(x) + varphi(x). Throws EvaluationError naming the first
/// non-finite component.
State drift_full(const SdeProblem& problem, std::span<const double> x);

/// L^{j1} g_{j2}(x) with 0-based noise indices.
State levy_product_coefficient(const SdeProblem& problem, std::span<const double> x,
                               std::size_t j1, std::size_t j2);

/// max over samples and unordered pairs j1 < j2 of ||L^{j1}g_{j2} - L^{j2}g_{j1}||.
CommutativityReport check_commutativity(const SdeProblem& problem,
                                        std::span<const State> sample_points,
                                        double tolerance);

/// Default tolerance for check_commutativity: 1e-8 with closed forms, 1e-4
/// when the finite-difference fallback is in use.
double default_commutativity_tolerance(const SdeProblem& problem);

/// Names accepted by builtin_problem(), in a stable order.
std::vector<std::string> builtin_problem_names();

/// "ginzburg-landau-unstable": dX = (2X - X^5) dt + X dW, X0 = 1, T = 1.
/// "ginzburg-landau-stable":   dX = (-2X - X^5) dt + sqrt(2) X dW, X0 = 1, T = 5.
/// Throws LookupError for anything else.
SdeProblem builtin_problem(const std::string& name);

/// Scalar linear SDE dX = aX dt + bX dW (geometric Brownian motion) with
/// varphi = 0. Exact solution X_T = x0 exp((a - b^2/2) T + b W_T).
SdeProblem linear_problem(double a, double b, double x0, double horizon);

}  // namespace stm
