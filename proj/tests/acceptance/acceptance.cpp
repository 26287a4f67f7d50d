// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "common/properties.hpp"
#include "stm/analysis.hpp"
#include "stm/parallel.hpp"
#include "stm/schemes.hpp"
#include "stm/stability.hpp"

using namespace stm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.ok) ++failures;
    std::printf("%s %d %s: %s [%.1f s]\n", o.ok ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::vector<double> dyadic(int from, int to) {
    std::vector<double> hs;
    for (int e = from; e <= to; ++e) hs.push_back(std::ldexp(1.0, -e));
    return hs;
}

std::string fmt(double x, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const unsigned kThreads = default_thread_count();

// Fitted orders of both semi-tamed schemes from one coupled run.
std::vector<ConvergenceReport> unstable_study(std::size_t paths, int h_from, int h_to,
                                                std::size_t reference_steps, std::uint64_t seed) {
    const auto problem = builtin_problem("ginzburg-landau-unstable");
    const SchemeKind schemes[] = {SchemeKind::semi_tamed_milstein, SchemeKind::semi_tamed_euler};
    StudyOptions opts;
    opts.threads = kThreads;
    return strong_error_study(problem, schemes, dyadic(h_from, h_to), paths, reference_steps,
                              SchemeKind::semi_tamed_milstein, seed, opts);
}

std::vector<ConvergenceReport> full_unstable;

Outcome criterion_1() {
    full_unstable = unstable_study(5000, 6, 11, 1u << 14, 20140401);
    const double r = full_unstable[0].fit.value().order;
    const bool main_ok = r >= 0.85 && r <= 1.15;

    const auto t0 = std::chrono::steady_clock::now();
    const auto smoke = unstable_study(500, 5, 9, 1u << 13, 1);
    const double smoke_secs = elapsed_since(t0);
    const double rs = smoke[0].fit.value().order;
    const bool smoke_ok = rs >= 0.8 && rs <= 1.2 && smoke_secs < 30.0;
    return {main_ok && smoke_ok, "r = " + fmt(r) + " (resid " + fmt(full_unstable[0].fit.value().residual, 3) +
                                     ") in [0.85, 1.15]; smoke r = " + fmt(rs) + " in [0.8, 1.2] in " +
                                     fmt(smoke_secs, 3) + " s < 30 s"};
}

Outcome criterion_2() {
    if (full_unstable.size() < 2) return {false, "the check 1 run is unavailable"};
    const double r = full_unstable[1].fit.value().order;
    return {r >= 0.35 && r <= 0.65,
            "r = " + fmt(r) + " (resid " + fmt(full_unstable[1].fit.value().residual, 3) + ") in [0.35, 0.65]"};
}

Outcome criterion_3() {
    const double a = 1.5, b = 1.0;
    const auto problem = linear_problem(a, b, 1.0, 1.0);

    // Per-step identity against the classical Milstein update.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t mismatches = 0;
    const std::size_t trials = 100000;
    for (std::size_t i = 0; i < trials; ++i) {
        const double y = 10.0 * normal(rng);
        const double h = std::ldexp(1.0, -static_cast<int>(1 + 12 * unit(rng)));
        const double dw = std::sqrt(h) * normal(rng);
        const double classical = y + (a * y) * h + (b * y) * dw + (0.5 * (b * (b * y))) * (dw * dw - h);
        const double x[] = {y};
        const double dws[] = {dw};
        if (step_semi_tamed_milstein(problem, x, dws, h)[0] != classical) ++mismatches;
    }

    StudyOptions opts;
    opts.threads = kThreads;
    opts.exact_terminal = [=](const PathBundle& fine) {
        double w = 0.0;
        for (double v : fine.increments()) w += v;
        return State{std::exp((a - 0.5 * b * b) * fine.horizon() + b * w)};
    };
    const auto r = strong_error_study(problem, SchemeKind::semi_tamed_milstein, dyadic(4, 9), 2000,
                                      512, SchemeKind::semi_tamed_milstein, 7, opts);
    const double order = r.fit.value().order;
    return {mismatches == 0 && order >= 0.9 && order <= 1.1,
            std::to_string(mismatches) + " of " + std::to_string(trials) +
                " steps differ from classical Milstein; exact-reference order " + fmt(order) +
                " in [0.9, 1.1]"};
}

Outcome criterion_4() {
    const auto t = stability_threshold(ginzburg_landau_stable_params());
    const bool ok = std::abs(t.h_star - 0.25) <= 1e-12 && std::abs(t.h1 - 0.25) <= 1e-12 &&
                    std::abs(t.h2 - 2.0 / 3.0) <= 1e-12;
    return {ok, "h_star = " + fmt(t.h_star, 17) + ", h1 = " + fmt(t.h1, 17) + ", h2 = " +
                    fmt(t.h2, 17)};
}

Outcome criterion_5() {
    const auto problem = builtin_problem("ginzburg-landau-stable");
    const double h = 1.0 / 16.0;
    const double gamma = decay_rate(ginzburg_landau_stable_params(), h);
    const auto c = mean_square_curve(problem, SchemeKind::semi_tamed_milstein, h, 5000, 20140403,
                                     kThreads);
    std::size_t violations = 0;
    double worst = -INFINITY;
    for (std::size_t n = 0; n < c.times.size(); ++n) {
        const double m = c.mean_square[n];
        const double rel = m > 0.0 ? c.standard_error[n] / m : 0.0;
        const double bound = std::exp(-gamma * c.times[n]) * (1.0 + 5.0 * rel);
        worst = std::max(worst, m / bound);
        if (!(m <= bound)) ++violations;
    }
    return {violations == 0 && c.blown_up == 0 && c.times.size() == 81,
            "gamma_h = " + fmt(gamma, 6) + ", " + std::to_string(violations) + " of " +
                std::to_string(c.times.size()) + " gridpoints above the bound, max ratio " +
                fmt(worst) + ", " + std::to_string(c.blown_up) + " paths lost"};
}

Outcome criterion_6() {
    const auto problem = builtin_problem("ginzburg-landau-stable");
    auto terminal = [&](SchemeKind s) {
        const auto c = mean_square_curve(problem, s, 0.25, 5000, 20140403, kThreads);
        // A path lost to overflow has an unbounded second moment.
        return c.blown_up > 0 ? INFINITY : c.mean_square.back();
    };
    const double te = terminal(SchemeKind::tamed_euler);
    const double tm = terminal(SchemeKind::tamed_milstein);
    const double ste = terminal(SchemeKind::semi_tamed_euler);
    const double stm = terminal(SchemeKind::semi_tamed_milstein);
    const bool ok = ste < te && ste < tm && stm < te && stm < tm;
    return {ok, "terminal E|Y|^2: semi-tamed Euler " + fmt(ste) + ", semi-tamed Milstein " +
                    fmt(stm) + ", tamed Euler " + fmt(te) + ", tamed Milstein " + fmt(tm)};
}

Outcome criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const testing::PropertyResult results[] = {
        testing::taming_bound(10000, 1),      testing::coarsen_laws(200, 2),
        testing::power_law_exact(1000, 3),    testing::commutativity_checker(),
        testing::decay_rate_positive(10000, 4),
    };
    const double secs = elapsed_since(t0);
    std::string detail;
    bool ok = secs < 10.0;
    for (const auto& r : results) {
        if (!r.ok) {
            ok = false;
            detail += r.detail + "; ";
        }
    }
    return {ok, (detail.empty() ? std::string("all five suites hold; ") : detail) + "ran in " +
                    fmt(secs, 3) + " s < 10 s"};
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion_8() {
    const fs::path root = fs::temp_directory_path() / "stm_acceptance_repro";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::pair<const char*, const char*> experiments[] = {
        {"converge", R"({"model": "ginzburg-landau-unstable",
            "schemes": ["semi-tamed-milstein", "semi-tamed-euler", "tamed-milstein"],
            "stepsizes": "2^-4..2^-8", "paths": 300, "reference_steps": 1024, "seed": 8})"},
        {"stability", R"({"model": "ginzburg-landau-stable",
            "schemes": ["tamed-euler", "semi-tamed-euler", "tamed-milstein", "semi-tamed-milstein"],
            "stepsizes": [0.25, 0.0625], "paths": 500, "seed": 8})"},
        {"simulate", R"({"model": "ginzburg-landau-unstable", "horizon": 2,
            "schemes": ["em", "semi-tamed-milstein"], "stepsizes": [0.25, 0.015625],
            "path_indices": [0, 5, 9], "seed": 8})"},
    };
    std::size_t compared = 0;
    for (const auto& [sub, text] : experiments) {
        const fs::path cfg = root / (std::string(sub) + ".json");
        std::ofstream(cfg) << text;
        std::vector<fs::path> dirs;
        for (const char* threads : {"1", "8", "1", "8"}) {
            const fs::path out = root / (std::string(sub) + "_" + std::to_string(dirs.size()));
            const std::string args[] = {"stmilstein", sub, "--config", cfg.string(),
                                        "--threads", threads, "--out", out.string()};
            const char* argv[std::size(args)];
            for (std::size_t i = 0; i < std::size(args); ++i) argv[i] = args[i].c_str();
            std::ostringstream sink;
            if (cli::run_cli(static_cast<int>(std::size(args)), argv, sink, sink) != 0)
                return {false, std::string(sub) + " failed: " + sink.str()};
            dirs.push_back(out);
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            if (entry.path().extension() != ".csv") continue;
            const auto reference = slurp(entry.path());
            for (std::size_t k = 1; k < dirs.size(); ++k) {
                if (slurp(dirs[k] / entry.path().filename()) != reference)
                    return {false, entry.path().filename().string() + " differs in run " +
                                       std::to_string(k)};
            }
            ++compared;
        }
    }
    return {compared >= 3, std::to_string(compared) +
                               " CSV files byte-identical over 2 runs each at 1 and 8 threads"};
}

Outcome criterion_9() {
    const int first = 8, last = 17;
    const auto reports = unstable_study(1000, first, last, 1u << 19, 20140402);
    auto first_hit = [](const ConvergenceReport& r) -> std::optional<std::size_t> {
        // stepsizes are decreasing, so the first hit is the smallest N.
        for (std::size_t i = 0; i < r.stepsizes.size(); ++i)
            if (r.rms_errors[i] <= 1e-3) return i;
        return std::nullopt;
    };
    auto steps = [](double h) { return static_cast<std::size_t>(std::llround(1.0 / h)); };
    const auto im = first_hit(reports[0]);
    const auto ie = first_hit(reports[1]);
    if (!im) return {false, "semi-tamed Milstein never reached 1e-3 for N <= 2^17"};
    const std::size_t nm = steps(reports[0].stepsizes[*im]);
    std::string detail = "semi-tamed Milstein N = " + std::to_string(nm) + " (rms " +
                         fmt(reports[0].rms_errors[*im], 3) + ")";
    if (ie) {
        const std::size_t ne = steps(reports[1].stepsizes[*ie]);
        const double ratio = static_cast<double>(ne) / static_cast<double>(nm);
        detail += ", semi-tamed Euler N = " + std::to_string(ne) + " (rms " +
                  fmt(reports[1].rms_errors[*ie], 3) + "), ratio " + fmt(ratio);
        return {ratio >= 8.0, detail + " >= 8"};
    }
    // Not reached on the scanned grid: N_euler exceeds 2^17.
    const double bound = std::ldexp(1.0, last + 1) / static_cast<double>(nm);
    detail += ", semi-tamed Euler above 1e-3 up to N = 2^17 (rms " +
              fmt(reports[1].rms_errors.back(), 3) + "), ratio > " + fmt(bound);
    return {bound >= 8.0, detail};
}

}  // namespace

int main() {
    std::printf("acceptance run, %u worker thread(s)\n", kThreads);
    report(1, "semi-tamed Milstein strong order on the unstable Ginzburg-Landau example", criterion_1);
    report(2, "semi-tamed Euler strong order on the same runs", criterion_2);
    report(3, "geometric Brownian motion: classical Milstein identity and exact-reference order",
           criterion_3);
    report(4, "stability threshold for the stable Ginzburg-Landau constants", criterion_4);
    report(5, "mean-square decay bound at h = 1/16", criterion_5);
    report(6, "semi-tamed schemes beat tamed schemes at h = 1/4", criterion_6);
    report(7, "property suites", criterion_7);
    report(8, "byte-identical CSV output across runs and worker counts", criterion_8);
    report(9, "steps to rms error 1e-3: Milstein at least 8x fewer than Euler", criterion_9);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
