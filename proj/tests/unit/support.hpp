#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "stm/model.hpp"

namespace stm::testing {

// Diagonal noise g_{k,j}(x) = sigma_k x_k delta_{kj}, linear drift phi = a x.
// L^{j1}g_{j2} vanishes for j1 != j2 and equals sigma_j^2 x_j e_j on the diagonal.
inline SdeProblem diagonal_noise_problem(std::vector<double> sigma, bool closed_form = true) {
    const std::size_t d = sigma.size();
    SdeProblem::Builder b(d, d);
    b.phi([](std::span<const double> x, std::span<double> out) {
         for (std::size_t k = 0; k < x.size(); ++k) out[k] = -x[k];
     })
        .diffusion([sigma](std::span<const double> x, std::size_t j, std::span<double> out) {
            for (std::size_t k = 0; k < x.size(); ++k) out[k] = k == j ? sigma[k] * x[k] : 0.0;
        })
        .initial_value(std::vector<double>(d, 1.0))
        .horizon(1.0)
        .label("diagonal-noise");
    if (closed_form) {
        b.levy_product([sigma](std::span<const double> x, std::size_t j1, std::size_t j2,
                               std::span<double> out) {
            for (std::size_t k = 0; k < x.size(); ++k)
                out[k] = (j1 == j2 && k == j1) ? sigma[k] * (sigma[k] * x[k]) : 0.0;
        });
    }
    return b.build();
}

// g_1 = (x_2, 0), g_2 = (0, x_1): L^1 g_2 = (0, x_2), L^2 g_1 = (x_1, 0).
inline SdeProblem non_commutative_problem() {
    return SdeProblem::Builder(2, 2)
        .diffusion([](std::span<const double> x, std::size_t j, std::span<double> out) {
            out[0] = j == 0 ? x[1] : 0.0;
            out[1] = j == 0 ? 0.0 : x[0];
        })
        .initial_value({1.0, 2.0})
        .horizon(1.0)
        .label("non-commutative")
        .build();
}

// g_j(x) = B_j x with B_j = c_j I + s_j A for a fixed matrix A. The B_j commute,
// so L^{j1}g_{j2}(x) = B_{j2} B_{j1} x is symmetric in (j1, j2).
struct CommutingLinearNoise {
    std::size_t d;
    std::vector<double> A;  // d x d row-major
    std::vector<double> c, s;

    void apply(std::size_t j, std::span<const double> x, std::span<double> out) const {
        for (std::size_t r = 0; r < d; ++r) {
            double acc = c[j] * x[r];
            for (std::size_t k = 0; k < d; ++k) acc += s[j] * A[r * d + k] * x[k];
            out[r] = acc;
        }
    }
};

inline SdeProblem commuting_linear_problem(std::size_t d, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CommutingLinearNoise noise{d, std::vector<double>(d * d), std::vector<double>(m),
                               std::vector<double>(m)};
    for (double& a : noise.A) a = u(rng);
    for (std::size_t j = 0; j < m; ++j) {
        noise.c[j] = u(rng);
        noise.s[j] = u(rng);
    }
    return SdeProblem::Builder(d, m)
        .phi([](std::span<const double> x, std::span<double> out) {
            for (std::size_t k = 0; k < x.size(); ++k) out[k] = 0.5 * x[k];
        })
        .diffusion([noise](std::span<const double> x, std::size_t j, std::span<double> out) {
            noise.apply(j, x, out);
        })
        .levy_product([noise](std::span<const double> x, std::size_t j1, std::size_t j2,
                              std::span<double> out) {
            std::vector<double> tmp(x.size());
            noise.apply(j1, x, tmp);
            noise.apply(j2, tmp, out);
        })
        .initial_value(std::vector<double>(d, 1.0))
        .horizon(1.0)
        .label("commuting-linear")
        .build();
}

inline std::vector<State> grid_1d(double lo, double hi, std::size_t n) {
    std::vector<State> pts;
    for (std::size_t i = 0; i < n; ++i)
        pts.push_back({lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1)});
    return pts;
}

}  // namespace stm::testing
