#include "runner.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "stm/errors.hpp"
#include "stm/rng_paths.hpp"
#include "table.hpp"

namespace stm::cli {

namespace {

namespace fs = std::filesystem;

std::string number_or_inf(double x) { return std::isinf(x) ? "inf" : format_number(x); }

std::function<State(const PathBundle&)> exact_linear_terminal(const LinearModel& m) {
    return [m](const PathBundle& fine) {
        double w = 0.0;
        for (double v : fine.increments()) w += v;
        return State{m.x0 * std::exp((m.a - 0.5 * m.b * m.b) * fine.horizon() + m.b * w)};
    };
}

std::string threshold_text(const StabilityParams& params, const std::vector<double>& hs) {
    const auto t = stability_threshold(params);
    std::ostringstream out;
    out << "h1 = " << number_or_inf(t.h1) << '\n'
        << "h2 = " << number_or_inf(t.h2) << '\n'
        << "h_star = " << number_or_inf(t.h_star) << '\n'
        << "gamma_limit = " << format_number(2.0 * params.rho - params.theta * params.theta)
        << '\n';
    if (!hs.empty()) {
        out << "\nh,gamma_h\n";
        for (double h : hs) {
            if (h > 0.0 && h < t.h_star)
                out << format_number(h) << ',' << format_number(decay_rate(params, h)) << '\n';
            else
                out << "# h = " << format_number(h) << " is not below h_star\n";
        }
    }
    return out.str();
}

void log_written(std::ostream& log, RunResult& result, const fs::path& file) {
    result.files.push_back(file);
    log << "wrote " << file.string() << '\n';
}

std::string plot_quote(std::string_view s) { return "'" + std::string(s) + "'"; }

void run_converge(const ExperimentConfig& cfg, std::ostream& log, RunResult& result) {
    const SdeProblem problem = resolve_model(cfg);
    StudyOptions opts;
    opts.threads = cfg.threads;
    opts.norm = cfg.error_norm;
    if (cfg.exact_reference) opts.exact_terminal = exact_linear_terminal(std::get<LinearModel>(*cfg.model));
    const SchemeKind reference = cfg.reference_scheme.value_or(SchemeKind::semi_tamed_milstein);
    log << "converge: " << problem.label() << ", " << *cfg.paths << " paths, reference N = "
        << *cfg.reference_steps << '\n';
    const auto reports = strong_error_study(problem, cfg.schemes, cfg.stepsizes, *cfg.paths,
                                            *cfg.reference_steps, reference, *cfg.seed, opts);

    const fs::path csv_file = cfg.output_dir / "convergence.csv";
    {
        CsvWriter csv(csv_file, {"scheme", "h", "rms_error", "stderr", "excluded_paths"});
        for (const auto& r : reports)
            for (std::size_t i = 0; i < r.stepsizes.size(); ++i)
                csv.text(scheme_name(r.scheme))
                    .number(r.stepsizes[i])
                    .number(r.rms_errors[i])
                    .number(r.standard_errors[i])
                    .count(r.excluded_paths(i))
                    .end_row();
    }
    log_written(log, result, csv_file);

    std::ostringstream fit;
    fit << "# rms_error ~ C h^r, least squares in log-log coordinates\n"
        << "scheme,C,r,residual\n";
    for (const auto& r : reports) {
        if (r.fit)
            fit << scheme_name(r.scheme) << ',' << format_number(r.fit->constant) << ','
                << format_number(r.fit->order) << ',' << format_number(r.fit->residual) << '\n';
        else
            fit << "# " << scheme_name(r.scheme) << ": fewer than two positive errors, no fit\n";
    }
    write_text(cfg.output_dir / "fit.txt", fit.str());
    log_written(log, result, cfg.output_dir / "fit.txt");

    if (cfg.plot) {
        std::ostringstream gp;
        gp << "set datafile separator ','\nset logscale xy\nset key top left\n"
              "set xlabel 'h'\nset ylabel 'rms error'\nplot ";
        for (std::size_t k = 0; k < reports.size(); ++k) {
            const auto name = scheme_name(reports[k].scheme);
            gp << (k ? ", \\\n     " : "") << "'< grep ^" << name
               << ", convergence.csv' using 2:3 with linespoints title " << plot_quote(name);
        }
        gp << '\n';
        write_text(cfg.output_dir / "convergence.gp", gp.str());
        log_written(log, result, cfg.output_dir / "convergence.gp");
    }
}

void run_stability(const ExperimentConfig& cfg, std::ostream& log, RunResult& result) {
    const SdeProblem problem = resolve_model(cfg);
    const fs::path csv_file = cfg.output_dir / "stability.csv";
    {
        CsvWriter csv(csv_file, {"scheme", "h", "t", "mean_square", "blown_up_count"});
        for (SchemeKind s : cfg.schemes) {
            for (double h : cfg.stepsizes) {
                const auto c = mean_square_curve(problem, s, h, *cfg.paths, *cfg.seed, cfg.threads);
                log << "stability: " << scheme_name(s) << " h = " << format_number(h) << ", "
                    << c.blown_up << " of " << c.paths << " paths blew up\n";
                // With every path lost there is no mean to report; an overflowing
                // sum ends the curve the same way.
                if (c.blown_up == c.paths) continue;
                for (std::size_t n = 0; n < c.times.size(); ++n) {
                    if (!std::isfinite(c.mean_square[n])) break;
                    csv.text(scheme_name(s))
                        .number(h)
                        .number(c.times[n])
                        .number(c.mean_square[n])
                        .count(c.blown_up)
                        .end_row();
                }
            }
        }
    }
    log_written(log, result, csv_file);

    if (cfg.stability_params) {
        write_text(cfg.output_dir / "threshold.txt",
                   threshold_text(*cfg.stability_params, cfg.stepsizes));
        log_written(log, result, cfg.output_dir / "threshold.txt");
    }

    if (cfg.plot) {
        std::ostringstream gp;
        gp << "set datafile separator ','\nset logscale y\nset xlabel 't'\n"
              "set ylabel 'E|Y|^2'\nplot ";
        bool first = true;
        for (SchemeKind s : cfg.schemes)
            for (double h : cfg.stepsizes) {
                const auto name = std::string(scheme_name(s));
                const auto hs = format_number(h);
                gp << (first ? "" : ", \\\n     ") << "'< grep ^" << name << "," << hs
                   << ", stability.csv' using 3:4 with lines title "
                   << plot_quote(name + " h=" + hs);
                first = false;
            }
        if (cfg.stability_params)
            for (double h : cfg.stepsizes)
                if (h < stability_threshold(*cfg.stability_params).h_star)
                    gp << ", \\\n     exp(-" << format_number(decay_rate(*cfg.stability_params, h))
                       << "*x) title " << plot_quote("bound h=" + format_number(h));
        gp << '\n';
        write_text(cfg.output_dir / "stability.gp", gp.str());
        log_written(log, result, cfg.output_dir / "stability.gp");
    }
}

void run_simulate(const ExperimentConfig& cfg, std::ostream& log, RunResult& result) {
    const SdeProblem problem = resolve_model(cfg);
    const std::size_t d = problem.dim_state();
    std::vector<std::string> header{"t"};
    for (std::size_t k = 1; k <= d; ++k) header.push_back("x_" + std::to_string(k));

    const fs::path summary_file = cfg.output_dir / "simulate_summary.csv";
    CsvWriter summary(summary_file, {"scheme", "h", "path", "rows", "blown_up"});
    for (double h : cfg.stepsizes) {
        const std::size_t steps = steps_for(problem.horizon(), h);
        for (std::uint64_t path : cfg.path_indices) {
            const PathBundle bundle =
                generate_paths(*cfg.seed, path, steps, problem.dim_noise(), problem.horizon());
            if (cfg.dump_paths) {
                const fs::path bin = cfg.output_dir / "paths" /
                                     ("path" + std::to_string(path) + "_N" +
                                      std::to_string(steps) + ".bin");
                if (bin.has_parent_path()) fs::create_directories(bin.parent_path());
                write_bundle(bundle, bin);
                log_written(log, result, bin);
            }
            for (SchemeKind s : cfg.schemes) {
                IntegrateOptions opts;
                opts.record_full = true;
                const Trajectory traj = integrate(problem, s, bundle, opts);
                const fs::path file = cfg.output_dir / ("trajectory_" + std::string(scheme_name(s)) +
                                                        "_N" + std::to_string(steps) + "_path" +
                                                        std::to_string(path) + ".csv");
                std::size_t rows = 0;
                {
                    CsvWriter csv(file, header);
                    for (std::size_t n = 0; n < traj.rows(); ++n) {
                        const auto row = traj.row(n);
                        bool finite = true;
                        for (double v : row) finite = finite && std::isfinite(v);
                        if (!finite) break;  // truncated at blow-up
                        csv.number(traj.times[n]);
                        for (double v : row) csv.number(v);
                        csv.end_row();
                        ++rows;
                    }
                }
                log_written(log, result, file);
                summary.text(scheme_name(s)).number(h).count(path).count(rows).count(traj.blew_up ? 1 : 0).end_row();
            }
        }
    }
    log_written(log, result, summary_file);
}

void run_threshold(const ExperimentConfig& cfg, std::ostream& log, RunResult& result) {
    const auto text = threshold_text(*cfg.stability_params, cfg.gamma_at);
    write_text(cfg.output_dir / "threshold.txt", text);
    log << text;
    log_written(log, result, cfg.output_dir / "threshold.txt");
}

std::vector<State> check_samples(const ExperimentConfig& cfg, std::size_t dim) {
    if (!cfg.sample_points.empty()) return cfg.sample_points;
    const SampleRange r = cfg.sample_range.value_or(SampleRange{});
    std::vector<State> pts;
    for (std::size_t i = 0; i < r.count; ++i) {
        const double t = r.lo + (r.hi - r.lo) * static_cast<double>(i) /
                                    static_cast<double>(r.count - 1);
        // Diagonal and coordinate axes; a single line when d = 1.
        pts.push_back(State(dim, t));
        if (dim > 1)
            for (std::size_t k = 0; k < dim; ++k) {
                State x(dim, 0.0);
                x[k] = t;
                pts.push_back(std::move(x));
            }
    }
    return pts;
}

void run_check(const ExperimentConfig& cfg, std::ostream& log, RunResult& result) {
    const SdeProblem problem = resolve_model(cfg);
    const auto pts = check_samples(cfg, problem.dim_state());
    const double tol = cfg.commutativity_tolerance.value_or(default_commutativity_tolerance(problem));
    const auto comm = check_commutativity(problem, pts, tol);

    std::ostringstream out;
    out << "model = " << problem.label() << '\n'
        << "sample_points = " << pts.size() << '\n'
        << "commutativity_passed = " << (comm.passed ? "true" : "false") << '\n'
        << "commutativity_max_violation = " << format_number(comm.max_violation) << '\n'
        << "commutativity_tolerance = " << format_number(comm.tolerance) << '\n';

    std::optional<double> gamma = cfg.gamma;
    if (!gamma && cfg.stability_params)
        gamma = 2.0 * cfg.stability_params->rho - cfg.stability_params->theta * cfg.stability_params->theta;
    if (gamma) {
        const auto diss = check_dissipativity(problem, *gamma, pts);
        out << "dissipativity_gamma = " << format_number(*gamma) << '\n'
            << "dissipativity_passed = " << (diss.passed ? "true" : "false") << '\n'
            << "dissipativity_margin = " << format_number(diss.margin) << '\n'
            << "dissipativity_worst_point =";
        for (double v : diss.worst_point) out << ' ' << format_number(v);
        out << '\n';
    } else {
        out << "# dissipativity not checked: set gamma or stability_params\n";
    }
    write_text(cfg.output_dir / "check.txt", out.str());
    log << out.str();
    log_written(log, result, cfg.output_dir / "check.txt");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
    RunResult result;
    std::filesystem::create_directories(config.output_dir);
    switch (config.kind) {
        case ExperimentKind::converge: run_converge(config, log, result); break;
        case ExperimentKind::stability: run_stability(config, log, result); break;
        case ExperimentKind::simulate: run_simulate(config, log, result); break;
        case ExperimentKind::threshold: run_threshold(config, log, result); break;
        case ExperimentKind::check: run_check(config, log, result); break;
    }
    return result;
}

}  // namespace stm::cli
