#include <cmath>

#include "doctest.h"
#include "stm/errors.hpp"
#include "stm/model.hpp"
#include "support.hpp"

using namespace stm;

TEST_CASE("drift_full on the built-in examples") {
    const auto unstable = builtin_problem("ginzburg-landau-unstable");
    const auto stable = builtin_problem("ginzburg-landau-stable");
    const State one{1.0}, two{2.0};
    CHECK(drift_full(unstable, one)[0] == 1.0);
    CHECK(drift_full(stable, two)[0] == -36.0);
}

TEST_CASE("drift_full cancels when phi = -varphi") {
    const auto p = SdeProblem::Builder(3, 1)
                       .phi([](std::span<const double> x, std::span<double> out) {
                           for (std::size_t k = 0; k < 3; ++k) out[k] = 3.0 * x[k] * x[k];
                       })
                       .varphi([](std::span<const double> x, std::span<double> out) {
                           for (std::size_t k = 0; k < 3; ++k) out[k] = -(3.0 * x[k] * x[k]);
                       })
                       .diffusion([](std::span<const double>, std::size_t, std::span<double> o) {
                           for (double& v : o) v = 0.0;
                       })
                       .initial_value({0.0, 0.0, 0.0})
                       .horizon(1.0)
                       .build();
    const State x{0.3, -1.7, 12.5};
    for (double v : drift_full(p, x)) CHECK(v == 0.0);
}

TEST_CASE("drift_full reports the non-finite component") {
    const auto p = SdeProblem::Builder(2, 1)
                       .varphi([](std::span<const double>, std::span<double> out) {
                           out[0] = 1.0;
                           out[1] = std::nan("");
                       })
                       .diffusion([](std::span<const double>, std::size_t, std::span<double> o) {
                           o[0] = o[1] = 0.0;
                       })
                       .initial_value({0.0, 0.0})
                       .horizon(1.0)
                       .build();
    const State x{0.0, 0.0};
    CHECK_THROWS_WITH_AS(drift_full(p, x), doctest::Contains("component 1"), EvaluationError);
}

TEST_CASE("levy_product_coefficient closed forms") {
    const State one{1.0};
    CHECK(levy_product_coefficient(builtin_problem("ginzburg-landau-unstable"), one, 0, 0)[0] ==
          1.0);
    CHECK(levy_product_coefficient(builtin_problem("ginzburg-landau-stable"), one, 0, 0)[0] ==
          doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("levy_product_coefficient vanishes for additive noise") {
    const auto p = SdeProblem::Builder(2, 2)
                       .diffusion([](std::span<const double>, std::size_t j, std::span<double> o) {
                           o[0] = 0.5 + static_cast<double>(j);
                           o[1] = -1.25;
                       })
                       .initial_value({0.0, 0.0})
                       .horizon(1.0)
                       .build();
    const State x{3.0, -4.0};
    for (std::size_t j1 = 0; j1 < 2; ++j1)
        for (std::size_t j2 = 0; j2 < 2; ++j2)
            for (double v : levy_product_coefficient(p, x, j1, j2)) CHECK(v == 0.0);
}

TEST_CASE("finite-difference fallback agrees with closed forms on the built-ins") {
    for (const auto& name : builtin_problem_names()) {
        const auto exact = builtin_problem(name);
        const auto fd = exact.without_closed_form_levy();
        REQUIRE_FALSE(fd.has_closed_form_levy());
        for (const State& x : testing::grid_1d(-2.0, 2.0, 101)) {
            const double a = levy_product_coefficient(exact, x, 0, 0)[0];
            const double b = levy_product_coefficient(fd, x, 0, 0)[0];
            CHECK(std::abs(a - b) <= 1e-4 * std::max(std::abs(a), 1e-12));
        }
    }
}

TEST_CASE("levy_product_coefficient argument errors") {
    const auto p = builtin_problem("ginzburg-landau-unstable");
    const State x{1.0};
    CHECK_THROWS_AS(levy_product_coefficient(p, x, 1, 0), ParameterError);
    const State inf{INFINITY};
    CHECK_THROWS_AS(levy_product_coefficient(p.without_closed_form_levy(), inf, 0, 0),
                    EvaluationError);
}

TEST_CASE("check_commutativity: scalar noise is trivially symmetric") {
    const auto p = builtin_problem("ginzburg-landau-unstable");
    const auto pts = testing::grid_1d(-3.0, 3.0, 7);
    const auto r = check_commutativity(p, pts, 0.0);
    CHECK(r.passed);
    CHECK(r.max_violation == 0.0);
    CHECK(r.sample_count == 7);
}

TEST_CASE("check_commutativity: diagonal noise passes") {
    const std::vector<State> pts{{1.0, 2.0}, {-0.5, 3.0}, {0.0, 0.0}, {7.0, -2.0}};
    const auto closed = testing::diagonal_noise_problem({0.7, 1.3});
    CHECK(check_commutativity(closed, pts, 1e-8).passed);
    const auto fd = testing::diagonal_noise_problem({0.7, 1.3}, false);
    CHECK(check_commutativity(fd, pts, default_commutativity_tolerance(fd)).passed);
    CHECK(default_commutativity_tolerance(fd) == 1e-4);
    CHECK(default_commutativity_tolerance(closed) == 1e-8);
}

TEST_CASE("check_commutativity: constructed non-commutative noise fails") {
    const auto p = testing::non_commutative_problem();
    const std::vector<State> pts{{1.0, 2.0}};
    const auto r = check_commutativity(p, pts, 1e-8);
    CHECK_FALSE(r.passed);
    // L^1 g_2 - L^2 g_1 = (0, 2) - (1, 0)
    CHECK(r.max_violation == doctest::Approx(std::sqrt(5.0)).epsilon(1e-6));
    CHECK_THROWS_AS(p.verified_commutative(r), ParameterError);
}

TEST_CASE("verified_commutative flags the problem") {
    const auto p = testing::diagonal_noise_problem({0.2, 0.4});
    CHECK_FALSE(p.commutativity_verified());
    const std::vector<State> pts{{1.0, 1.0}};
    CHECK(p.verified_commutative(check_commutativity(p, pts, 1e-8)).commutativity_verified());
    CHECK(builtin_problem("ginzburg-landau-stable").commutativity_verified());
}

TEST_CASE("check_commutativity needs samples") {
    const auto p = builtin_problem("ginzburg-landau-unstable");
    CHECK_THROWS_AS(check_commutativity(p, {}, 1e-8), ParameterError);
}

TEST_CASE("builtin_problem wiring") {
    const auto u = builtin_problem("ginzburg-landau-unstable");
    CHECK(u.dim_state() == 1);
    CHECK(u.dim_noise() == 1);
    CHECK(u.initial_value() == State{1.0});
    CHECK(u.horizon() == 1.0);
    State out(1);
    const State x{1.5};
    u.eval_phi(x, out);
    CHECK(out[0] == 3.0);
    u.eval_varphi(x, out);
    CHECK(out[0] == doctest::Approx(-std::pow(1.5, 5)));
    u.eval_diffusion(x, 0, out);
    CHECK(out[0] == 1.5);

    const auto s = builtin_problem("ginzburg-landau-stable");
    CHECK(s.horizon() == 5.0);
    CHECK(s.initial_value() == State{1.0});
    s.eval_phi(x, out);
    CHECK(out[0] == -3.0);
    s.eval_diffusion(x, 0, out);
    CHECK(out[0] == doctest::Approx(std::sqrt(2.0) * 1.5));

    CHECK_THROWS_WITH_AS(builtin_problem("unknown-model"),
                         doctest::Contains("ginzburg-landau-stable"), LookupError);
}

TEST_CASE("builder validation") {
    auto g = [](std::span<const double>, std::size_t, std::span<double> o) { o[0] = 0.0; };
    CHECK_THROWS_AS(SdeProblem::Builder(0, 1).diffusion(g).horizon(1).build(), ParameterError);
    CHECK_THROWS_AS(SdeProblem::Builder(1, 0).diffusion(g).initial_value({0}).horizon(1).build(),
                    ParameterError);
    CHECK_THROWS_AS(SdeProblem::Builder(1, 1).diffusion(g).initial_value({0}).horizon(0).build(),
                    ParameterError);
    CHECK_THROWS_AS(SdeProblem::Builder(1, 1).initial_value({0}).horizon(1).build(),
                    ParameterError);
    CHECK_THROWS_AS(SdeProblem::Builder(2, 1).diffusion(g).initial_value({0}).horizon(1).build(),
                    ParameterError);
    CHECK_THROWS_AS(builtin_problem("ginzburg-landau-stable").with_horizon(-1.0), ParameterError);
    CHECK(builtin_problem("ginzburg-landau-stable").with_horizon(2.5).horizon() == 2.5);
}
