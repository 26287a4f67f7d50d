#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stm/model.hpp"
#include "stm/rng_paths.hpp"

namespace stm {

enum class SchemeKind {
    euler_maruyama,
    tamed_euler,
    semi_tamed_euler,
    tamed_milstein,
    semi_tamed_milstein,
};

inline constexpr std::array<SchemeKind, 5> kAllSchemes = {
    SchemeKind::euler_maruyama, SchemeKind::tamed_euler, SchemeKind::semi_tamed_euler,
    SchemeKind::tamed_milstein, SchemeKind::semi_tamed_milstein};

/// Stable CLI names: "em", "tamed-euler", "semi-tamed-euler", "tamed-milstein",
/// "semi-tamed-milstein".
std::string_view scheme_name(SchemeKind kind) noexcept;

/// Inverse of scheme_name(). Throws LookupError.
SchemeKind parse_scheme(std::string_view name);

constexpr bool is_milstein(SchemeKind kind) noexcept {
    return kind == SchemeKind::tamed_milstein || kind == SchemeKind::semi_tamed_milstein;
}

/// v / (1 + h ||v||), Euclidean norm.
State tame(std::span<const double> v, double h);

/// 1/2 sum_{j1,j2} L^{j1}g_{j2}(x) (dW^{j1} dW^{j2} - delta_{j1 j2} h), evaluated
/// over unordered pairs. Only equal to the full double sum under commutative noise.
State milstein_correction(const SdeProblem& problem, std::span<const double> x,
                          std::span<const double> dW, double h);

/// One step of `kind` from x with increment dW over stepsize h.
/// A non-finite result is returned as-is; callers decide what a blow-up means.
State step(const SdeProblem& problem, SchemeKind kind, std::span<const double> x,
           std::span<const double> dW, double h);

/// x + phi(x) h + tame(varphi(x), h) h + g(x) dW + milstein_correction.
State step_semi_tamed_milstein(const SdeProblem& problem, std::span<const double> x,
                               std::span<const double> dW, double h);
/// x + tame(f(x), h) h + g(x) dW + milstein_correction.
State step_tamed_milstein(const SdeProblem& problem, std::span<const double> x,
                          std::span<const double> dW, double h);
/// x + phi(x) h + tame(varphi(x), h) h + g(x) dW.
State step_semi_tamed_euler(const SdeProblem& problem, std::span<const double> x,
                            std::span<const double> dW, double h);
/// x + tame(f(x), h) h + g(x) dW.
State step_tamed_euler(const SdeProblem& problem, std::span<const double> x,
                       std::span<const double> dW, double h);
/// x + f(x) h + g(x) dW.
State step_euler_maruyama(const SdeProblem& problem, std::span<const double> x,
                          std::span<const double> dW, double h);

/// Reusable per-thread stepping kernel. Holds scratch buffers, so one instance
/// must not be shared between threads.
class Stepper {
public:
    Stepper(const SdeProblem& problem, SchemeKind kind);

    /// out may not alias x.
    void advance(std::span<const double> x, std::span<const double> dW, double h,
                 std::span<double> out);

    SchemeKind kind() const noexcept { return kind_; }

private:
    void add_correction(std::span<const double> x, std::span<const double> dW, double h,
                        std::span<double> out);

    const SdeProblem& problem_;
    SchemeKind kind_;
    std::vector<double> phi_;
    std::vector<double> varphi_;
    std::vector<double> column_;
    std::vector<double> levy_;
    std::vector<double> correction_;
    std::vector<double> scratch_;

    friend State milstein_correction(const SdeProblem&, std::span<const double>,
                                     std::span<const double>, double);
};

struct Trajectory {
    std::vector<double> times;
    /// Row-major (rows x dim). rows == N + 1 when recorded fully, else 2 (t = 0, t = T).
    std::vector<double> states;
    std::size_t dim = 0;
    bool blew_up = false;
    /// Index of the first step whose output was non-finite.
    std::optional<std::size_t> blowup_step;

    std::size_t rows() const noexcept { return dim == 0 ? 0 : states.size() / dim; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {states.data() + i * dim, dim};
    }
    std::span<const double> terminal() const noexcept { return row(rows() - 1); }
};

struct IntegrateOptions {
    bool record_full = false;
    /// Run Milstein schemes on multi-noise problems whose commutativity was
    /// never verified.
    bool allow_unverified_noise = false;
};

/// Applies `kind` bundle.steps() times with h = T / N. On the first
/// non-finite state the trajectory is flagged, stepping stops and the
/// remaining rows hold quiet NaN.
Trajectory integrate(const SdeProblem& problem, SchemeKind kind, const PathBundle& bundle,
                     const IntegrateOptions& options);

inline Trajectory integrate(const SdeProblem& problem, SchemeKind kind, const PathBundle& bundle,
                            bool record_full) {
    return integrate(problem, kind, bundle, IntegrateOptions{record_full, false});
}

/// Throws ParameterError when `kind` needs commutative noise that `problem`
/// has not been verified to have.
void require_supported(const SdeProblem& problem, SchemeKind kind, bool allow_unverified_noise);

}  // namespace stm
