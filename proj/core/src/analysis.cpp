#include "stm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "stm/errors.hpp"
#include "stm/parallel.hpp"

namespace stm {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

double squared_norm(std::span<const double> a) noexcept {
    double s = 0.0;
    for (double c : a) s += c * c;
    return s;
}

// Mean and standard error of the mean from running sums.
std::pair<double, double> mean_and_stderr(double sum, double sum_sq, std::size_t n) {
    if (n == 0) return {0.0, 0.0};
    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    if (n < 2) return {mean, 0.0};
    const double var = std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1.0));
    return {mean, std::sqrt(var / nn)};
}

struct CellAcc {
    double sum = 0.0;     // sum of squared errors
    double sum_sq = 0.0;  // sum of squared errors squared
    std::size_t count = 0;
    std::size_t blown_up = 0;
};

struct StudyAcc {
    std::vector<CellAcc> cells;  // scheme-major, then stepsize
    std::size_t reference_excluded = 0;
};

}  // namespace

PowerLawFit fit_power_law(std::span<const double> stepsizes, std::span<const double> errors) {
    if (stepsizes.size() != errors.size())
        throw ParameterError("stepsizes and errors differ in length");
    if (stepsizes.size() < 2) throw ParameterError("power law fit needs at least two points");
    const std::size_t n = stepsizes.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(stepsizes[i] > 0.0) || !(errors[i] > 0.0) || !std::isfinite(stepsizes[i]) ||
            !std::isfinite(errors[i]))
            throw ParameterError("power law fit needs strictly positive finite data");
        lx[i] = std::log(stepsizes[i]);
        ly[i] = std::log(errors[i]);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw ParameterError("power law fit needs two distinct stepsizes");
    PowerLawFit fit;
    fit.order = sxy / sxx;
    const double log_c = my - fit.order * mx;
    fit.constant = std::exp(log_c);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (log_c + fit.order * lx[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss);
    return fit;
}

std::size_t steps_for(double horizon, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("stepsize must be positive");
    const double ratio = horizon / h;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * n) {
        std::ostringstream msg;
        msg << "stepsize " << h << " does not divide the horizon " << horizon;
        throw ParameterError(msg.str());
    }
    return static_cast<std::size_t>(n);
}

std::vector<ConvergenceReport> strong_error_study(const SdeProblem& problem,
                                                  std::span<const SchemeKind> schemes,
                                                  std::span<const double> stepsizes,
                                                  std::size_t paths, std::size_t reference_steps,
                                                  SchemeKind reference_scheme, std::uint64_t seed,
                                                  const StudyOptions& options) {
    if (paths == 0) throw ParameterError("paths must be >= 1");
    if (reference_steps == 0) throw ParameterError("reference_steps must be >= 1");
    if (schemes.empty()) throw ParameterError("no schemes requested");
    if (stepsizes.empty()) throw ParameterError("no stepsizes requested");
    if (options.exact_terminal && options.norm != ErrorNorm::terminal)
        throw ParameterError("an exact terminal solution only supports the terminal-error norm");
    for (SchemeKind s : schemes) require_supported(problem, s, options.allow_unverified_noise);
    if (!options.exact_terminal)
        require_supported(problem, reference_scheme, options.allow_unverified_noise);

    const double T = problem.horizon();
    std::vector<double> hs(stepsizes.begin(), stepsizes.end());
    std::sort(hs.begin(), hs.end(), std::greater<>());
    if (std::adjacent_find(hs.begin(), hs.end()) != hs.end())
        throw ParameterError("stepsizes must be distinct");
    std::vector<std::size_t> factors;
    for (double h : hs) {
        const std::size_t n = steps_for(T, h);
        if (reference_steps % n != 0) {
            std::ostringstream msg;
            msg << "stepsize " << h << " (N = " << n << ") does not divide the reference grid of "
                << reference_steps << " steps";
            throw ParameterError(msg.str());
        }
        factors.push_back(reference_steps / n);
    }

    const std::size_t n_schemes = schemes.size();
    const std::size_t n_h = hs.size();
    const bool sup = options.norm == ErrorNorm::sup_over_grid;
    const IntegrateOptions ref_opts{sup, options.allow_unverified_noise};
    const IntegrateOptions study_opts{sup, options.allow_unverified_noise};

    auto block = [&](std::size_t begin, std::size_t end) {
        StudyAcc acc;
        acc.cells.resize(n_schemes * n_h);
        for (std::size_t path = begin; path < end; ++path) {
            const PathBundle fine =
                generate_paths(seed, path, reference_steps, problem.dim_noise(), T);
            State exact;
            Trajectory reference;
            if (options.exact_terminal) {
                exact = options.exact_terminal(fine);
                if (!std::all_of(exact.begin(), exact.end(),
                                 [](double v) { return std::isfinite(v); })) {
                    ++acc.reference_excluded;
                    continue;
                }
            } else {
                reference = integrate(problem, reference_scheme, fine, ref_opts);
                if (reference.blew_up) {
                    ++acc.reference_excluded;
                    continue;
                }
            }
            const std::span<const double> ref_terminal =
                options.exact_terminal ? std::span<const double>(exact) : reference.terminal();
            for (std::size_t i = 0; i < n_h; ++i) {
                const PathBundle coarse = coarsen(fine, factors[i]);
                for (std::size_t s = 0; s < n_schemes; ++s) {
                    CellAcc& cell = acc.cells[s * n_h + i];
                    const Trajectory y = integrate(problem, schemes[s], coarse, study_opts);
                    if (y.blew_up) {
                        ++cell.blown_up;
                        continue;
                    }
                    double e2 = 0.0;
                    if (sup) {
                        for (std::size_t n = 0; n < y.rows(); ++n)
                            e2 = std::max(e2, squared_distance(reference.row(n * factors[i]),
                                                               y.row(n)));
                    } else {
                        e2 = squared_distance(ref_terminal, y.terminal());
                    }
                    if (!std::isfinite(e2)) {
                        ++cell.blown_up;
                        continue;
                    }
                    cell.sum += e2;
                    cell.sum_sq += e2 * e2;
                    ++cell.count;
                }
            }
        }
        return acc;
    };

    StudyAcc init;
    init.cells.resize(n_schemes * n_h);
    const StudyAcc total = blocked_reduce(
        paths, options.threads, init, block, [](StudyAcc& into, const StudyAcc& part) {
            into.reference_excluded += part.reference_excluded;
            for (std::size_t c = 0; c < into.cells.size(); ++c) {
                into.cells[c].sum += part.cells[c].sum;
                into.cells[c].sum_sq += part.cells[c].sum_sq;
                into.cells[c].count += part.cells[c].count;
                into.cells[c].blown_up += part.cells[c].blown_up;
            }
        });

    std::vector<ConvergenceReport> reports;
    for (std::size_t s = 0; s < n_schemes; ++s) {
        ConvergenceReport r;
        r.scheme = schemes[s];
        r.stepsizes = hs;
        r.paths = paths;
        r.reference_steps = reference_steps;
        r.reference_excluded = total.reference_excluded;
        std::vector<double> fit_h, fit_e;
        for (std::size_t i = 0; i < n_h; ++i) {
            const CellAcc& cell = total.cells[s * n_h + i];
            if (cell.count == 0) {
                std::ostringstream msg;
                msg << "no path survived for " << scheme_name(schemes[s]) << " at h = " << hs[i];
                throw EvaluationError(msg.str());
            }
            const auto [mse, mse_se] = mean_and_stderr(cell.sum, cell.sum_sq, cell.count);
            const double rms = std::sqrt(mse);
            r.rms_errors.push_back(rms);
            r.standard_errors.push_back(rms > 0.0 ? mse_se / (2.0 * rms) : 0.0);
            r.blown_up.push_back(cell.blown_up);
            if (rms > 0.0 && std::isfinite(rms)) {
                fit_h.push_back(hs[i]);
                fit_e.push_back(rms);
            }
        }
        if (fit_h.size() >= 2) r.fit = fit_power_law(fit_h, fit_e);
        reports.push_back(std::move(r));
    }
    return reports;
}

ConvergenceReport strong_error_study(const SdeProblem& problem, SchemeKind scheme,
                                     std::span<const double> stepsizes, std::size_t paths,
                                     std::size_t reference_steps, SchemeKind reference_scheme,
                                     std::uint64_t seed, const StudyOptions& options) {
    const SchemeKind one[] = {scheme};
    return std::move(strong_error_study(problem, one, stepsizes, paths, reference_steps,
                                        reference_scheme, seed, options)
                         .front());
}

namespace {

struct MomentAcc {
    std::vector<double> sum;
    std::vector<double> sum_sq;
    std::size_t count = 0;
    std::size_t blown_up = 0;
};

// Per-gridpoint sums of ||Y_n||^p and ||Y_n||^{2p} over surviving paths.
MomentAcc moment_sums(const SdeProblem& problem, SchemeKind scheme, std::size_t steps,
                      std::size_t paths, int p, std::uint64_t seed, unsigned threads,
                      bool allow_unverified_noise) {
    if (paths == 0) throw ParameterError("paths must be >= 1");
    require_supported(problem, scheme, allow_unverified_noise);
    const double T = problem.horizon();
    const std::size_t rows = steps + 1;
    const IntegrateOptions opts{true, allow_unverified_noise};

    auto block = [&](std::size_t begin, std::size_t end) {
        MomentAcc acc{std::vector<double>(rows, 0.0), std::vector<double>(rows, 0.0), 0, 0};
        std::vector<double> values(rows);
        for (std::size_t path = begin; path < end; ++path) {
            const PathBundle bundle = generate_paths(seed, path, steps, problem.dim_noise(), T);
            const Trajectory y = integrate(problem, scheme, bundle, opts);
            bool ok = !y.blew_up;
            for (std::size_t n = 0; ok && n < rows; ++n) {
                const double s = squared_norm(y.row(n));
                values[n] = p == 2 ? s : (p == 4 ? s * s : s * s * s);
                ok = std::isfinite(values[n]) && std::isfinite(values[n] * values[n]);
            }
            if (!ok) {
                ++acc.blown_up;
                continue;
            }
            for (std::size_t n = 0; n < rows; ++n) {
                acc.sum[n] += values[n];
                acc.sum_sq[n] += values[n] * values[n];
            }
            ++acc.count;
        }
        return acc;
    };

    MomentAcc init{std::vector<double>(rows, 0.0), std::vector<double>(rows, 0.0), 0, 0};
    return blocked_reduce(paths, threads, init, block, [](MomentAcc& into, const MomentAcc& part) {
        for (std::size_t n = 0; n < into.sum.size(); ++n) {
            into.sum[n] += part.sum[n];
            into.sum_sq[n] += part.sum_sq[n];
        }
        into.count += part.count;
        into.blown_up += part.blown_up;
    });
}

}  // namespace

MeanSquareCurve mean_square_curve(const SdeProblem& problem, SchemeKind scheme, double h,
                                  std::size_t paths, std::uint64_t seed, unsigned threads,
                                  bool allow_unverified_noise) {
    const std::size_t steps = steps_for(problem.horizon(), h);
    const MomentAcc acc =
        moment_sums(problem, scheme, steps, paths, 2, seed, threads, allow_unverified_noise);
    MeanSquareCurve curve;
    curve.scheme = scheme;
    curve.stepsize = h;
    curve.paths = paths;
    curve.blown_up = acc.blown_up;
    for (std::size_t n = 0; n <= steps; ++n) {
        curve.times.push_back(n == steps ? problem.horizon() : static_cast<double>(n) * h);
        const auto [mean, se] = mean_and_stderr(acc.sum[n], acc.sum_sq[n], acc.count);
        curve.mean_square.push_back(mean);
        curve.standard_error.push_back(se);
    }
    return curve;
}

MomentBound empirical_moment_bound(const SdeProblem& problem, SchemeKind scheme, double h,
                                   std::size_t paths, int p, std::uint64_t seed,
                                   unsigned threads) {
    if (p != 2 && p != 4 && p != 6) throw ParameterError("moment order p must be 2, 4 or 6");
    const std::size_t steps = steps_for(problem.horizon(), h);
    const MomentAcc acc = moment_sums(problem, scheme, steps, paths, p, seed, threads, false);
    MomentBound bound;
    bound.blown_up = acc.blown_up;
    for (std::size_t n = 0; n <= steps; ++n) {
        const double m = acc.count == 0 ? 0.0 : acc.sum[n] / static_cast<double>(acc.count);
        bound.moments.push_back(m);
        if (m > bound.max_moment) {
            bound.max_moment = m;
            bound.argmax_step = n;
        }
    }
    return bound;
}

}  // namespace stm
