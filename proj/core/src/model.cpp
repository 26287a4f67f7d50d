#include "stm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stm/errors.hpp"

namespace stm {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

void require_finite(std::span<const double> v, const char* what) {
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k])) {
            std::ostringstream msg;
            msg << what << ": component " << k << " is not finite (" << v[k] << ")";
            throw EvaluationError(msg.str());
        }
    }
}

void zero_field(std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
}

}  // namespace

void SdeProblem::eval_levy(std::span<const double> x, std::size_t j1, std::size_t j2,
                           std::span<double> out, std::span<double> scratch) const {
    if (levy_) {
        levy_(x, j1, j2, out);
        return;
    }
    // Directional central difference of g_{j2} along the unit vector of g_{j1},
    // rescaled by ||g_{j1}||.
    const std::size_t d = dim_state_;
    auto dir = scratch.subspan(0, d);
    auto probe = scratch.subspan(d, d);
    auto g_plus = scratch.subspan(2 * d, d);
    diffusion_(x, j1, dir);
    const double speed = norm2(dir);
    if (speed == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double eps = fd_relative_step_ * std::max(1.0, norm2(x));
    for (std::size_t k = 0; k < d; ++k) probe[k] = x[k] + eps * (dir[k] / speed);
    require_finite(probe, "finite-difference probe");
    diffusion_(probe, j2, g_plus);
    for (std::size_t k = 0; k < d; ++k) probe[k] = x[k] - eps * (dir[k] / speed);
    require_finite(probe, "finite-difference probe");
    diffusion_(probe, j2, out);
    for (std::size_t k = 0; k < d; ++k) out[k] = speed * (g_plus[k] - out[k]) / (2.0 * eps);
}

SdeProblem SdeProblem::with_horizon(double horizon) const {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ParameterError("horizon must be positive and finite");
    SdeProblem copy = *this;
    copy.horizon_ = horizon;
    return copy;
}

SdeProblem SdeProblem::verified_commutative(const CommutativityReport& report) const {
    if (!report.passed) {
        std::ostringstream msg;
        msg << "commutativity check failed for '" << label_ << "': max violation "
            << report.max_violation << " > tolerance " << report.tolerance;
        throw ParameterError(msg.str());
    }
    SdeProblem copy = *this;
    copy.commutativity_verified_ = true;
    return copy;
}

SdeProblem SdeProblem::without_closed_form_levy() const {
    SdeProblem copy = *this;
    copy.levy_ = nullptr;
    return copy;
}

SdeProblem::Builder::Builder(std::size_t dim_state, std::size_t dim_noise) {
    p_.dim_state_ = dim_state;
    p_.dim_noise_ = dim_noise;
}

SdeProblem::Builder& SdeProblem::Builder::phi(VectorField f) {
    p_.phi_ = std::move(f);
    return *this;
}
SdeProblem::Builder& SdeProblem::Builder::varphi(VectorField f) {
    p_.varphi_ = std::move(f);
    return *this;
}
SdeProblem::Builder& SdeProblem::Builder::diffusion(DiffusionColumn g) {
    p_.diffusion_ = std::move(g);
    return *this;
}
SdeProblem::Builder& SdeProblem::Builder::levy_product(LevyProduct lg) {
    p_.levy_ = std::move(lg);
    return *this;
}
SdeProblem::Builder& SdeProblem::Builder::initial_value(State x0) {
    p_.initial_value_ = std::move(x0);
    return *this;
}
SdeProblem::Builder& SdeProblem::Builder::horizon(double T) {
    p_.horizon_ = T;
    return *this;
}
SdeProblem::Builder& SdeProblem::Builder::label(std::string name) {
    p_.label_ = std::move(name);
    return *this;
}
SdeProblem::Builder& SdeProblem::Builder::fd_relative_step(double eta) {
    p_.fd_relative_step_ = eta;
    return *this;
}

SdeProblem SdeProblem::Builder::build() const {
    if (p_.dim_state_ < 1) throw ParameterError("dim_state must be >= 1");
    if (p_.dim_noise_ < 1) throw ParameterError("dim_noise must be >= 1");
    if (!(p_.horizon_ > 0.0) || !std::isfinite(p_.horizon_))
        throw ParameterError("horizon must be positive and finite");
    if (!p_.diffusion_) throw ParameterError("diffusion coefficient is required");
    if (p_.initial_value_.size() != p_.dim_state_)
        throw ParameterError("initial value length does not match dim_state");
    require_finite(p_.initial_value_, "initial value");
    if (!(p_.fd_relative_step_ > 0.0)) throw ParameterError("fd_relative_step must be positive");
    SdeProblem out = p_;
    if (!out.phi_) out.phi_ = zero_field;
    if (!out.varphi_) out.varphi_ = zero_field;
    return out;
}

State drift_full(const SdeProblem& problem, std::span<const double> x) {
    if (x.size() != problem.dim_state()) throw ParameterError("state length mismatch");
    State phi(problem.dim_state());
    State varphi(problem.dim_state());
    problem.eval_phi(x, phi);
    problem.eval_varphi(x, varphi);
    for (std::size_t k = 0; k < phi.size(); ++k) phi[k] += varphi[k];
    require_finite(phi, "drift");
    return phi;
}

State levy_product_coefficient(const SdeProblem& problem, std::span<const double> x,
                               std::size_t j1, std::size_t j2) {
    if (x.size() != problem.dim_state()) throw ParameterError("state length mismatch");
    if (j1 >= problem.dim_noise() || j2 >= problem.dim_noise())
        throw ParameterError("noise index out of range");
    require_finite(x, "state");
    State out(problem.dim_state());
    State scratch(3 * problem.dim_state());
    problem.eval_levy(x, j1, j2, out, scratch);
    require_finite(out, "diffusion derivative product");
    return out;
}

CommutativityReport check_commutativity(const SdeProblem& problem,
                                        std::span<const State> sample_points, double tolerance) {
    if (sample_points.empty()) throw ParameterError("sample_points must be nonempty");
    if (!(tolerance >= 0.0)) throw ParameterError("tolerance must be nonnegative");
    CommutativityReport report;
    report.sample_count = sample_points.size();
    report.tolerance = tolerance;
    const std::size_t m = problem.dim_noise();
    for (const State& x : sample_points) {
        for (std::size_t j1 = 0; j1 < m; ++j1) {
            for (std::size_t j2 = j1 + 1; j2 < m; ++j2) {
                const State a = levy_product_coefficient(problem, x, j1, j2);
                const State b = levy_product_coefficient(problem, x, j2, j1);
                double s = 0.0;
                for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
                report.max_violation = std::max(report.max_violation, std::sqrt(s));
            }
        }
    }
    report.passed = report.max_violation <= tolerance;
    return report;
}

double default_commutativity_tolerance(const SdeProblem& problem) {
    return problem.has_closed_form_levy() ? 1e-8 : 1e-4;
}

std::vector<std::string> builtin_problem_names() {
    return {"ginzburg-landau-unstable", "ginzburg-landau-stable"};
}

namespace {

// Scalar Ginzburg-Landau type model dX = (a X - X^5) dt + s X dW.
SdeProblem ginzburg_landau(const std::string& name, double a, double s, double T) {
    return SdeProblem::Builder(1, 1)
        .phi([a](std::span<const double> x, std::span<double> out) { out[0] = a * x[0]; })
        .varphi([](std::span<const double> x, std::span<double> out) {
            const double x2 = x[0] * x[0];
            out[0] = -(x2 * x2 * x[0]);
        })
        .diffusion([s](std::span<const double> x, std::size_t, std::span<double> out) {
            out[0] = s * x[0];
        })
        .levy_product([s](std::span<const double> x, std::size_t, std::size_t,
                          std::span<double> out) { out[0] = s * (s * x[0]); })
        .initial_value({1.0})
        .horizon(T)
        .label(name)
        .build();
}

}  // namespace

SdeProblem builtin_problem(const std::string& name) {
    if (name == "ginzburg-landau-unstable") return ginzburg_landau(name, 2.0, 1.0, 1.0);
    if (name == "ginzburg-landau-stable") return ginzburg_landau(name, -2.0, std::sqrt(2.0), 5.0);
    std::ostringstream msg;
    msg << "unknown model '" << name << "'; valid names:";
    for (const auto& n : builtin_problem_names()) msg << ' ' << n;
    throw LookupError(msg.str());
}

SdeProblem linear_problem(double a, double b, double x0, double horizon) {
    std::ostringstream name;
    name << "linear(a=" << a << ",b=" << b << ")";
    return SdeProblem::Builder(1, 1)
        .phi([a](std::span<const double> x, std::span<double> out) { out[0] = a * x[0]; })
        .diffusion([b](std::span<const double> x, std::size_t, std::span<double> out) {
            out[0] = b * x[0];
        })
        .levy_product([b](std::span<const double> x, std::size_t, std::size_t,
                          std::span<double> out) { out[0] = b * (b * x[0]); })
        .initial_value({x0})
        .horizon(horizon)
        .label(name.str())
        .build();
}

}  // namespace stm
