#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stm/errors.hpp"

namespace stm::cli {

namespace {

using nlohmann::json;

// Locates the line of the first `"key":` in the raw document.
class Locator {
public:
    Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        std::ostringstream out;
        out << source_;
        if (const auto line = line_of(key)) out << ':' << *line;
        out << ": " << message;
        throw ConfigError(out.str());
    }

    [[noreturn]] void fail_at(std::size_t line, const std::string& message) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + message);
    }

    [[noreturn]] void fail_document(const std::string& message) const {
        throw ConfigError(source_ + ":1: " + message);
    }

private:
    std::optional<std::size_t> line_of(const std::string& key) const {
        if (key.empty()) return std::nullopt;
        const std::regex pattern("\"" + key + "\"\\s*:");
        std::smatch m;
        if (!std::regex_search(text_, m, pattern)) return std::nullopt;
        const auto pos = static_cast<std::size_t>(m.position(0));
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + pos, '\n'));
    }

    const std::string& text_;
    std::string source_;
};

const std::map<ExperimentKind, std::set<std::string>>& allowed_keys() {
    static const std::set<std::string> common{"kind", "model", "seed", "horizon", "output_dir",
                                              "threads"};
    static const std::map<ExperimentKind, std::set<std::string>> keys = [] {
        std::map<ExperimentKind, std::set<std::string>> k;
        k[ExperimentKind::converge] = {"schemes", "stepsizes", "paths", "reference_steps",
                                       "reference_scheme", "error_norm", "plot"};
        k[ExperimentKind::stability] = {"schemes", "stepsizes", "paths", "stability_params", "plot"};
        k[ExperimentKind::simulate] = {"schemes", "stepsizes", "path_indices", "dump_paths"};
        k[ExperimentKind::threshold] = {"stability_params", "gamma_at"};
        k[ExperimentKind::check] = {"sample_points", "sample_range", "gamma",
                                    "commutativity_tolerance", "stability_params"};
        for (auto& [kind, set] : k) set.insert(common.begin(), common.end());
        return k;
    }();
    return keys;
}

double positive_real(const json& v, const std::string& key, const Locator& loc) {
    if (!v.is_number()) loc.fail(key, "'" + key + "' must be a number");
    const double x = v.get<double>();
    if (!(x > 0.0) || !std::isfinite(x)) loc.fail(key, "'" + key + "' must be positive");
    return x;
}

double real(const json& v, const std::string& key, const Locator& loc) {
    if (!v.is_number()) loc.fail(key, "'" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) loc.fail(key, "'" + key + "' must be finite");
    return x;
}

std::uint64_t unsigned_integer(const json& v, const std::string& key, const Locator& loc) {
    if (!v.is_number_unsigned()) loc.fail(key, "'" + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::size_t positive_integer(const json& v, const std::string& key, const Locator& loc) {
    const auto n = unsigned_integer(v, key, loc);
    if (n == 0) loc.fail(key, "'" + key + "' must be >= 1");
    return static_cast<std::size_t>(n);
}

bool boolean(const json& v, const std::string& key, const Locator& loc) {
    if (!v.is_boolean()) loc.fail(key, "'" + key + "' must be true or false");
    return v.get<bool>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                    const Locator& loc) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) {
            std::string msg = "unknown key '" + key + "' in " + where + "; allowed:";
            for (const auto& a : allowed) msg += " " + a;
            loc.fail(key, msg);
        }
    }
}

ModelSpec parse_model(const json& v, const Locator& loc) {
    if (v.is_string()) {
        const auto name = v.get<std::string>();
        const auto names = builtin_problem_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            std::string msg = "unknown model '" + name + "'; valid names:";
            for (const auto& n : names) msg += " " + n;
            msg += " (or an object {\"type\": \"linear\", \"a\", \"b\", \"x0\"})";
            loc.fail("model", msg);
        }
        return name;
    }
    if (!v.is_object()) loc.fail("model", "'model' must be a name or an object");
    reject_unknown(v, {"type", "a", "b", "x0"}, "model", loc);
    if (!v.contains("type") || v["type"] != "linear")
        loc.fail("model", "inline models must have \"type\": \"linear\"");
    LinearModel lin;
    if (!v.contains("a") || !v.contains("b")) loc.fail("model", "linear model needs 'a' and 'b'");
    lin.a = real(v["a"], "a", loc);
    lin.b = real(v["b"], "b", loc);
    if (v.contains("x0")) lin.x0 = real(v["x0"], "x0", loc);
    return lin;
}

std::vector<double> parse_stepsizes(const json& v, const Locator& loc) {
    if (v.is_string()) {
        try {
            return parse_exponent_range(v.get<std::string>());
        } catch (const ConfigError& e) {
            loc.fail("stepsizes", e.what());
        }
    }
    if (!v.is_array() || v.empty())
        loc.fail("stepsizes", "'stepsizes' must be a nonempty list or a range \"2^-a..2^-b\"");
    std::vector<double> hs;
    for (const auto& e : v) hs.push_back(positive_real(e, "stepsizes", loc));
    return hs;
}

std::vector<SchemeKind> parse_schemes(const json& v, const Locator& loc) {
    if (!v.is_array() || v.empty()) loc.fail("schemes", "'schemes' must be a nonempty list");
    std::vector<SchemeKind> out;
    for (const auto& e : v) {
        if (!e.is_string()) loc.fail("schemes", "scheme names must be strings");
        try {
            out.push_back(parse_scheme(e.get<std::string>()));
        } catch (const LookupError& err) {
            loc.fail("schemes", err.what());
        }
    }
    return out;
}

StabilityParams parse_stability_params(const json& v, const Locator& loc) {
    if (!v.is_object()) loc.fail("stability_params", "'stability_params' must be an object");
    reject_unknown(v, {"rho", "theta", "K", "beta", "v", "v_bar", "alpha", "m"},
                   "stability_params", loc);
    for (const char* key : {"rho", "theta", "K", "beta", "v", "v_bar", "alpha", "m"})
        if (!v.contains(key))
            loc.fail("stability_params", std::string("stability_params is missing '") + key + "'");
    StabilityParams p;
    p.rho = real(v["rho"], "rho", loc);
    p.theta = real(v["theta"], "theta", loc);
    p.lip_K = real(v["K"], "K", loc);
    p.beta = real(v["beta"], "beta", loc);
    p.v = real(v["v"], "v", loc);
    p.v_bar = real(v["v_bar"], "v_bar", loc);
    p.alpha = real(v["alpha"], "alpha", loc);
    p.m = positive_integer(v["m"], "m", loc);
    try {
        validate(p);
    } catch (const ParameterError& e) {
        loc.fail("stability_params", e.what());
    }
    return p;
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::converge: return "converge";
        case ExperimentKind::stability: return "stability";
        case ExperimentKind::simulate: return "simulate";
        case ExperimentKind::threshold: return "threshold";
        case ExperimentKind::check: return "check";
    }
    return "?";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) noexcept {
    for (auto k : {ExperimentKind::converge, ExperimentKind::stability, ExperimentKind::simulate,
                   ExperimentKind::threshold, ExperimentKind::check})
        if (kind_name(k) == name) return k;
    return std::nullopt;
}

std::vector<double> parse_exponent_range(const std::string& text) {
    static const std::regex pattern(R"(^\s*2\^(-?\d+)\s*\.\.\s*2\^(-?\d+)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern))
        throw ConfigError("bad stepsize range '" + text + "' (expected \"2^-a..2^-b\")");
    const int a = std::stoi(m[1].str());
    const int b = std::stoi(m[2].str());
    std::vector<double> hs;
    const int step = a <= b ? 1 : -1;
    for (int e = a;; e += step) {
        hs.push_back(std::ldexp(1.0, e));
        if (e == b) break;
    }
    return hs;
}

SdeProblem resolve_model(const ExperimentConfig& config) {
    if (!config.model) throw ConfigError("no model configured");
    SdeProblem p = std::holds_alternative<std::string>(*config.model)
                       ? builtin_problem(std::get<std::string>(*config.model))
                       : [&] {
                             const auto& lin = std::get<LinearModel>(*config.model);
                             return linear_problem(lin.a, lin.b, lin.x0, 1.0);
                         }();
    if (config.horizon) p = p.with_horizon(*config.horizon);
    return p;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              ExperimentKind expected, const Overrides& overrides) {
    const Locator loc(text, source);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports a byte offset; convert it to a line number.
        const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line = 1 + static_cast<std::size_t>(
                                         std::count(text.begin(), text.begin() + byte, '\n'));
        loc.fail_at(line, std::string("JSON syntax error: ") + e.what());
    }
    if (!doc.is_object()) loc.fail_document("configuration must be a JSON object");

    ExperimentConfig cfg;
    cfg.kind = expected;
    if (doc.contains("kind")) {
        if (!doc["kind"].is_string()) loc.fail("kind", "'kind' must be a string");
        const auto k = parse_kind(doc["kind"].get<std::string>());
        if (!k) loc.fail("kind", "unknown kind '" + doc["kind"].get<std::string>() + "'");
        if (*k != expected)
            loc.fail("kind", "config is for '" + std::string(kind_name(*k)) +
                                 "' but the subcommand is '" + std::string(kind_name(expected)) +
                                 "'");
    }
    reject_unknown(doc, allowed_keys().at(expected), std::string(kind_name(expected)) + " config",
                   loc);

    if (doc.contains("model")) cfg.model = parse_model(doc["model"], loc);
    if (doc.contains("seed")) cfg.seed = unsigned_integer(doc["seed"], "seed", loc);
    if (doc.contains("horizon")) cfg.horizon = positive_real(doc["horizon"], "horizon", loc);
    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) loc.fail("output_dir", "'output_dir' must be a string");
        cfg.output_dir = doc["output_dir"].get<std::string>();
    }
    if (doc.contains("threads"))
        cfg.threads = static_cast<unsigned>(positive_integer(doc["threads"], "threads", loc));
    if (doc.contains("schemes")) cfg.schemes = parse_schemes(doc["schemes"], loc);
    if (doc.contains("stepsizes")) cfg.stepsizes = parse_stepsizes(doc["stepsizes"], loc);
    if (doc.contains("paths")) cfg.paths = positive_integer(doc["paths"], "paths", loc);
    if (doc.contains("stability_params"))
        cfg.stability_params = parse_stability_params(doc["stability_params"], loc);
    if (doc.contains("plot")) cfg.plot = boolean(doc["plot"], "plot", loc);

    if (doc.contains("reference_steps"))
        cfg.reference_steps = positive_integer(doc["reference_steps"], "reference_steps", loc);
    if (doc.contains("reference_scheme")) {
        const auto& v = doc["reference_scheme"];
        if (!v.is_string()) loc.fail("reference_scheme", "'reference_scheme' must be a string");
        if (v == "exact") {
            cfg.exact_reference = true;
        } else {
            try {
                cfg.reference_scheme = parse_scheme(v.get<std::string>());
            } catch (const LookupError& e) {
                loc.fail("reference_scheme", e.what());
            }
        }
    }
    if (doc.contains("error_norm")) {
        const auto& v = doc["error_norm"];
        if (v == "terminal")
            cfg.error_norm = ErrorNorm::terminal;
        else if (v == "sup")
            cfg.error_norm = ErrorNorm::sup_over_grid;
        else
            loc.fail("error_norm", "'error_norm' must be \"terminal\" or \"sup\"");
    }

    if (doc.contains("path_indices")) {
        const auto& v = doc["path_indices"];
        if (!v.is_array() || v.empty()) loc.fail("path_indices", "'path_indices' must be a nonempty list");
        cfg.path_indices.clear();
        for (const auto& e : v) cfg.path_indices.push_back(unsigned_integer(e, "path_indices", loc));
    }
    if (doc.contains("dump_paths")) cfg.dump_paths = boolean(doc["dump_paths"], "dump_paths", loc);

    if (doc.contains("gamma_at")) {
        const auto& v = doc["gamma_at"];
        if (!v.is_array()) loc.fail("gamma_at", "'gamma_at' must be a list of stepsizes");
        for (const auto& e : v) cfg.gamma_at.push_back(positive_real(e, "gamma_at", loc));
    }

    if (doc.contains("sample_points")) {
        const auto& v = doc["sample_points"];
        if (!v.is_array() || v.empty()) loc.fail("sample_points", "'sample_points' must be a nonempty list");
        for (const auto& pt : v) {
            State x;
            if (pt.is_number()) {
                x.push_back(real(pt, "sample_points", loc));
            } else if (pt.is_array()) {
                for (const auto& c : pt) x.push_back(real(c, "sample_points", loc));
            } else {
                loc.fail("sample_points", "sample points must be numbers or lists of numbers");
            }
            cfg.sample_points.push_back(std::move(x));
        }
    }
    if (doc.contains("sample_range")) {
        const auto& v = doc["sample_range"];
        if (!v.is_object()) loc.fail("sample_range", "'sample_range' must be an object");
        reject_unknown(v, {"lo", "hi", "count"}, "sample_range", loc);
        SampleRange r;
        if (v.contains("lo")) r.lo = real(v["lo"], "lo", loc);
        if (v.contains("hi")) r.hi = real(v["hi"], "hi", loc);
        if (v.contains("count")) r.count = positive_integer(v["count"], "count", loc);
        if (!(r.hi > r.lo) || r.count < 2) loc.fail("sample_range", "need lo < hi and count >= 2");
        cfg.sample_range = r;
    }
    if (doc.contains("gamma")) cfg.gamma = positive_real(doc["gamma"], "gamma", loc);
    if (doc.contains("commutativity_tolerance")) {
        const auto& v = doc["commutativity_tolerance"];
        if (!v.is_number() || !(v.get<double>() >= 0.0))
            loc.fail("commutativity_tolerance", "'commutativity_tolerance' must be >= 0");
        cfg.commutativity_tolerance = v.get<double>();
    }

    if (overrides.seed) cfg.seed = overrides.seed;
    if (overrides.paths) cfg.paths = overrides.paths;
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    if (overrides.threads) cfg.threads = *overrides.threads;

    // Kind-specific requirements.
    auto require = [&](bool present, const std::string& key) {
        if (!present)
            loc.fail_document(std::string(kind_name(expected)) + " config requires '" + key + "'");
    };
    const bool needs_model = expected != ExperimentKind::threshold;
    if (needs_model) require(cfg.model.has_value(), "model");
    switch (expected) {
        case ExperimentKind::converge:
            require(!cfg.schemes.empty(), "schemes");
            require(!cfg.stepsizes.empty(), "stepsizes");
            require(cfg.paths.has_value(), "paths");
            require(cfg.seed.has_value(), "seed");
            require(cfg.reference_steps.has_value(), "reference_steps");
            if (!cfg.exact_reference && !cfg.reference_scheme)
                cfg.reference_scheme = SchemeKind::semi_tamed_milstein;
            if (cfg.exact_reference) {
                if (!std::holds_alternative<LinearModel>(*cfg.model))
                    loc.fail("reference_scheme",
                             "\"exact\" reference is only available for linear models");
                if (cfg.error_norm != ErrorNorm::terminal)
                    loc.fail("error_norm", "\"exact\" reference supports only the terminal norm");
            }
            break;
        case ExperimentKind::stability:
            require(!cfg.schemes.empty(), "schemes");
            require(!cfg.stepsizes.empty(), "stepsizes");
            require(cfg.paths.has_value(), "paths");
            require(cfg.seed.has_value(), "seed");
            break;
        case ExperimentKind::simulate:
            require(!cfg.schemes.empty(), "schemes");
            require(!cfg.stepsizes.empty(), "stepsizes");
            require(cfg.seed.has_value(), "seed");
            break;
        case ExperimentKind::threshold:
            require(cfg.stability_params.has_value(), "stability_params");
            break;
        case ExperimentKind::check:
            if (cfg.sample_points.empty() && !cfg.sample_range) cfg.sample_range = SampleRange{};
            break;
    }

    if (needs_model) {
        SdeProblem problem = [&] {
            try {
                return resolve_model(cfg);
            } catch (const std::exception& e) {
                loc.fail("model", e.what());
            }
        }();
        for (double h : cfg.stepsizes) {
            std::size_t n = 0;
            try {
                n = steps_for(problem.horizon(), h);
            } catch (const ParameterError& e) {
                loc.fail("stepsizes", std::string("stepsizes: ") + e.what());
            }
            if (cfg.reference_steps && *cfg.reference_steps % n != 0) {
                std::ostringstream msg;
                msg << "stepsize " << h << " (N = " << n << ") does not divide reference_steps = "
                    << *cfg.reference_steps;
                loc.fail("reference_steps", msg.str());
            }
        }
        for (const State& x : cfg.sample_points)
            if (x.size() != problem.dim_state())
                loc.fail("sample_points", "sample point dimension does not match the model");
        for (SchemeKind s : cfg.schemes)
            if (is_milstein(s) && !problem.commutativity_verified())
                loc.fail("schemes", "Milstein schemes need a commutative-noise model");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file, ExperimentKind expected,
                             const Overrides& overrides) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file.string() + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), file.string(), expected, overrides);
}

}  // namespace stm::cli
