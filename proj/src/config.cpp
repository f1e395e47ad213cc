#include "kinex/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "kinex/snapshot_io.hpp"

namespace kinex {

namespace {

const char* const kKnownKeys[] = {
    "kind", "seed", "output_dir", "output_precision", "workers",
    "agents", "horizon", "snapshot_interval",
    "initial", "initial_snapshot", "initial_x", "initial_y", "initial_dx", "initial_dy",
    "initial_v", "initial_w",
    "lambda", "alpha", "noise", "noise_delta", "trade_variant",
    "exponent_randomization", "exponent_lo", "exponent_hi", "selection",
    "sigma1_sq", "sigma2_sq", "dtau", "moment_orders",
    "epsilons", "tail_fraction",
    "metric_s", "grid_lo", "grid_hi", "grid_per_ray", "reference_horizon",
};

bool is_known_key(const std::string& key) {
    return std::find_if(std::begin(kKnownKeys), std::end(kKnownKeys),
                        [&](const char* k) { return key == k; }) != std::end(kKnownKeys);
}

struct RawEntry {
    std::string value;
    int line = 0;
    int col = 0;  // column of the key start, 1-based
};

struct Parser {
    std::map<std::string, RawEntry> entries;
    std::vector<ConfigIssue> issues;

    void syntax_error(int line, int col, std::string message) {
        issues.push_back({line, col, true, std::move(message)});
    }
    void semantic_error(const std::string& key, std::string message) {
        int line = 0;
        int col = 0;
        if (auto it = entries.find(key); it != entries.end()) {
            line = it->second.line;
            col = it->second.col;
        }
        issues.push_back({line, col, false, std::move(message)});
    }

    bool has(const std::string& key) const { return entries.count(key) != 0; }

    // Typed readers: on parse failure they record an issue and leave `out`
    // untouched (the default survives).
    void read_double(const std::string& key, double& out) {
        auto it = entries.find(key);
        if (it == entries.end()) return;
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(it->second.value.c_str(), &end);
        if (end == it->second.value.c_str() || *end != '\0' || errno == ERANGE ||
            !std::isfinite(v)) {
            syntax_error(it->second.line, it->second.col,
                         "value of '" + key + "' is not a finite number: '" + it->second.value +
                             "'");
            return;
        }
        out = v;
    }

    void read_u64(const std::string& key, std::uint64_t& out) {
        auto it = entries.find(key);
        if (it == entries.end()) return;
        const std::string& v = it->second.value;
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
            syntax_error(it->second.line, it->second.col,
                         "value of '" + key + "' is not a non-negative integer: '" + v + "'");
            return;
        }
        errno = 0;
        const unsigned long long parsed = std::strtoull(v.c_str(), nullptr, 10);
        if (errno == ERANGE) {
            syntax_error(it->second.line, it->second.col,
                         "value of '" + key + "' is out of range: '" + v + "'");
            return;
        }
        out = parsed;
    }

    void read_size(const std::string& key, std::size_t& out) {
        std::uint64_t v = out;
        read_u64(key, v);
        out = static_cast<std::size_t>(v);
    }

    void read_int(const std::string& key, int& out) {
        std::uint64_t v = static_cast<std::uint64_t>(out);
        read_u64(key, v);
        if (v > 1000000) {
            semantic_error(key, "value of '" + key + "' is unreasonably large");
            return;
        }
        out = static_cast<int>(v);
    }

    void read_string(const std::string& key, std::string& out) {
        auto it = entries.find(key);
        if (it != entries.end()) out = it->second.value;
    }

    void read_path(const std::string& key, std::filesystem::path& out) {
        auto it = entries.find(key);
        if (it != entries.end()) out = it->second.value;
    }

    void read_double_list(const std::string& key, std::vector<double>& out) {
        auto it = entries.find(key);
        if (it == entries.end()) return;
        std::vector<double> values;
        std::stringstream ss(it->second.value);
        std::string token;
        while (std::getline(ss, token, ',')) {
            const auto b = token.find_first_not_of(" \t");
            const auto e = token.find_last_not_of(" \t");
            if (b == std::string::npos) {
                syntax_error(it->second.line, it->second.col,
                             "empty element in list value of '" + key + "'");
                return;
            }
            token = token.substr(b, e - b + 1);
            errno = 0;
            char* end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (end == token.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
                syntax_error(it->second.line, it->second.col,
                             "list element of '" + key + "' is not a finite number: '" + token +
                                 "'");
                return;
            }
            values.push_back(v);
        }
        if (values.empty()) {
            syntax_error(it->second.line, it->second.col, "empty list value of '" + key + "'");
            return;
        }
        out = std::move(values);
    }

    // Enumerated token; `choices` maps token -> enum value.
    template <typename T>
    void read_enum(const std::string& key, T& out,
                   std::initializer_list<std::pair<const char*, T>> choices) {
        auto it = entries.find(key);
        if (it == entries.end()) return;
        for (const auto& [token, value] : choices) {
            if (it->second.value == token) {
                out = value;
                return;
            }
        }
        std::string allowed;
        for (const auto& [token, value] : choices) {
            (void)value;
            if (!allowed.empty()) allowed += " | ";
            allowed += token;
        }
        syntax_error(it->second.line, it->second.col,
                     "value of '" + key + "' must be one of: " + allowed + " (got '" +
                         it->second.value + "')");
    }
};

void tokenize(const std::string& text, Parser& p) {
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const auto hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            p.syntax_error(lineno, static_cast<int>(line.size()) + 1,
                           "expected 'key = value', no '=' found");
            continue;
        }
        const auto key_end = line.find_last_not_of(" \t", eq == 0 ? 0 : eq - 1);
        if (eq == 0 || key_end == std::string::npos || key_end < first) {
            p.syntax_error(lineno, static_cast<int>(first) + 1, "empty key before '='");
            continue;
        }
        std::string key = line.substr(first, key_end - first + 1);
        const auto val_begin = line.find_first_not_of(" \t", eq + 1);
        if (val_begin == std::string::npos) {
            p.syntax_error(lineno, static_cast<int>(eq) + 2, "empty value for key '" + key + "'");
            continue;
        }
        const auto val_end = line.find_last_not_of(" \t");
        std::string value = line.substr(val_begin, val_end - val_begin + 1);
        if (!is_known_key(key)) {
            p.syntax_error(lineno, static_cast<int>(first) + 1, "unknown key '" + key + "'");
            continue;
        }
        if (p.entries.count(key)) {
            p.syntax_error(lineno, static_cast<int>(first) + 1,
                           "duplicate key '" + key + "' (first set on line " +
                               std::to_string(p.entries[key].line) + ")");
            continue;
        }
        p.entries[key] = {std::move(value), lineno, static_cast<int>(first) + 1};
    }
}

// Keys meaningful for each experiment kind; anything else present is an error.
bool key_applies(const std::string& key, ExperimentKind kind) {
    static const char* const common[] = {"kind", "seed", "output_dir", "output_precision",
                                         "workers", "agents", "horizon", "snapshot_interval",
                                         "initial", "initial_snapshot"};
    static const char* const population[] = {"lambda", "alpha", "noise", "noise_delta",
                                             "trade_variant", "exponent_randomization",
                                             "exponent_lo", "exponent_hi", "selection",
                                             "initial_x", "initial_y", "initial_dx",
                                             "initial_dy"};
    static const char* const particle[] = {"lambda", "alpha", "sigma1_sq", "sigma2_sq", "dtau",
                                           "initial_v", "initial_w", "moment_orders"};
    auto in = [&key](auto& list) {
        return std::find_if(std::begin(list), std::end(list),
                            [&](const char* k) { return key == k; }) != std::end(list);
    };
    if (in(common)) return true;
    switch (kind) {
        case ExperimentKind::Nonlinear:
        case ExperimentKind::Linear:
            return in(population);
        case ExperimentKind::FokkerPlanck:
            return in(particle);
        case ExperimentKind::QuasiInvariantSweep:
            return in(population) || key == "epsilons";
        case ExperimentKind::TailStudy:
            return in(particle) || key == "tail_fraction";
        case ExperimentKind::MetricStudy:
            return in(population) || key == "metric_s" || key == "grid_lo" || key == "grid_hi" ||
                   key == "grid_per_ray" || key == "reference_horizon";
    }
    return false;
}

void validate(Parser& p, ExperimentConfig& cfg) {
    auto err = [&p](const std::string& key, const std::string& message) {
        p.semantic_error(key, message);
    };

    // Kind-key applicability.
    for (const auto& [key, entry] : p.entries) {
        if (!key_applies(key, cfg.kind)) {
            p.issues.push_back({entry.line, entry.col, false,
                                "key '" + key + "' does not apply to experiment kind '" +
                                    to_string(cfg.kind) + "'"});
        }
    }

    if (cfg.agents < 2 && cfg.is_population_kind()) {
        err("agents", "population runs need at least 2 agents");
    }
    if (cfg.agents < 1) err("agents", "need at least 1 particle");
    if (!(cfg.horizon >= 0.0)) err("horizon", "horizon must be non-negative");
    if (!(cfg.snapshot_interval >= 0.0)) {
        err("snapshot_interval", "snapshot interval must be non-negative");
    }
    if (cfg.output_precision < 6 || cfg.output_precision > 17) {
        err("output_precision",
            "output precision must lie in [6, 17] (17 is required for bit-exact round-trips)");
    }
    if (cfg.workers < 1) err("workers", "worker count must be at least 1");

    // Initial data.
    const bool population = cfg.is_population_kind();
    if (cfg.initial == InitialKind::File) {
        if (cfg.initial_snapshot.empty()) {
            err("initial", "initial = file requires initial_snapshot to be set");
        }
    } else if (p.has("initial_snapshot")) {
        err("initial_snapshot", "initial_snapshot is only read when initial = file");
    }
    if (!population &&
        (cfg.initial == InitialKind::TwoPoint || cfg.initial == InitialKind::Uniform ||
         cfg.initial == InitialKind::Exponential)) {
        err("initial", "particle runs support initial = point | file only");
    }
    if (cfg.kind == ExperimentKind::QuasiInvariantSweep && cfg.initial != InitialKind::TwoPoint) {
        err("initial",
            "the scaling sweep requires initial = two-point (the comparison law is built from "
            "the two starting values of w)");
    }
    if (population) {
        if (!(cfg.initial_x >= 0.0) || !(cfg.initial_y >= 0.0)) {
            err("initial_x", "initial coordinates must be non-negative");
        }
        if (cfg.initial == InitialKind::Exponential &&
            (!(cfg.initial_x > 0.0) || !(cfg.initial_y > 0.0))) {
            err("initial_x", "exponential initial data needs positive means");
        }
        if (cfg.initial == InitialKind::TwoPoint || cfg.initial == InitialKind::Uniform) {
            if (!(cfg.initial_dx >= 0.0) || !(cfg.initial_dy >= 0.0)) {
                err("initial_dx", "initial spread must be non-negative");
            }
            if (cfg.initial_x - cfg.initial_dx < 0.0 || cfg.initial_y - cfg.initial_dy < 0.0) {
                err("initial_dx", "initial spread exceeds the center: negative holdings");
            }
        }
        if (cfg.initial == InitialKind::TwoPoint && cfg.agents % 2 != 0) {
            err("agents", "two-point initial data needs an even number of agents");
        }
    } else {
        if (!(cfg.initial_v >= 0.0)) err("initial_v", "initial v must be non-negative");
        if (std::abs(cfg.initial_w) > cfg.initial_v) {
            err("initial_w", "initial data must satisfy |w| <= v (support cone)");
        }
    }

    // Model parameters.
    if (population) {
        for (const auto& msg : cfg.trade.validation_errors()) {
            // Attach each violation to the key that most plausibly caused it.
            std::string key = "lambda";
            if (msg.find("exponent") != std::string::npos) key = "alpha";
            if (msg.find("noise") != std::string::npos || msg.find("delta") != std::string::npos) {
                key = p.has("noise_delta") ? "noise_delta" : "noise";
            }
            if (msg.find("randomization") != std::string::npos) key = "exponent_randomization";
            err(key, msg);
        }
        const bool linear_kind = cfg.kind != ExperimentKind::Nonlinear;
        if (linear_kind && cfg.trade.variant == TradeVariant::EdgeworthProportional) {
            err("trade_variant",
                "the proportional variant is only available for kind = nonlinear (mean-field "
                "updates are defined for the difference form)");
        }
        if (p.has("noise_delta") && cfg.trade.noise.kind == NoiseKind::DegenerateZero) {
            err("noise_delta", "noise_delta is only read when noise != none");
        }
        if (cfg.trade.exponents.kind == ExponentRandomization::Kind::Uniform &&
            (!p.has("exponent_lo") || !p.has("exponent_hi"))) {
            err("exponent_randomization",
                "exponent_randomization = uniform requires exponent_lo and exponent_hi");
        }
        if (cfg.trade.exponents.kind == ExponentRandomization::Kind::None &&
            (p.has("exponent_lo") || p.has("exponent_hi"))) {
            err("exponent_lo", "exponent bounds are only read when exponent_randomization = uniform");
        }
    } else {
        for (const auto& msg : cfg.fp.validation_errors()) {
            std::string key = "lambda";
            if (msg.find("exponent") != std::string::npos) key = "alpha";
            if (msg.find("sigma1") != std::string::npos) key = "sigma1_sq";
            if (msg.find("sigma2") != std::string::npos) key = "sigma2_sq";
            if (msg.find("time step") != std::string::npos) key = "dtau";
            err(key, msg);
        }
        for (double order : cfg.moment_orders) {
            if (!(order > 0.0)) {
                err("moment_orders", "moment orders must be positive");
                break;
            }
        }
    }

    // Kind-specific analysis controls.
    if (cfg.kind == ExperimentKind::QuasiInvariantSweep) {
        for (double eps : cfg.epsilons) {
            if (!(eps > 0.0) || eps > 1.0) {
                err("epsilons", "scaling factors must lie in (0, 1]");
                break;
            }
        }
    }
    if (cfg.kind == ExperimentKind::TailStudy) {
        if (!(cfg.tail_fraction > 0.0) || cfg.tail_fraction > 0.2) {
            err("tail_fraction", "tail fraction must lie in (0, 0.2]");
        }
    }
    if (cfg.kind == ExperimentKind::MetricStudy) {
        if (!(cfg.metric_s > 0.0)) err("metric_s", "metric exponent must be positive");
        if (!(cfg.snapshot_interval > 0.0) ||
            (cfg.horizon > 0.0 && cfg.horizon / cfg.snapshot_interval < 2.0)) {
            err("snapshot_interval",
                "the metric study regresses distance against time and needs at least 3 "
                "snapshots: require 0 < snapshot_interval <= horizon / 2");
        }
        if (cfg.grid_lo < 0.0 || !(cfg.grid_hi > cfg.resolved_grid_lo())) {
            err("grid_lo",
                "frequency grid needs 0 <= grid_lo < grid_hi; grid_lo 0 resolves to a "
                "noise-aware floor from the agent count");
        }
        if (cfg.grid_per_ray < 2) err("grid_per_ray", "need at least 2 grid points per ray");
        if (cfg.reference_horizon != 0.0 && cfg.reference_horizon < cfg.horizon) {
            err("reference_horizon",
                "reference horizon must be 0 (auto) or at least the run horizon");
        }
    }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Nonlinear: return "nonlinear";
        case ExperimentKind::Linear: return "linear";
        case ExperimentKind::FokkerPlanck: return "fokker-planck";
        case ExperimentKind::QuasiInvariantSweep: return "quasi-invariant-sweep";
        case ExperimentKind::TailStudy: return "tail-study";
        case ExperimentKind::MetricStudy: return "metric-study";
    }
    return "?";
}

std::string to_string(InitialKind kind) {
    switch (kind) {
        case InitialKind::Point: return "point";
        case InitialKind::TwoPoint: return "two-point";
        case InitialKind::Uniform: return "uniform";
        case InitialKind::Exponential: return "exponential";
        case InitialKind::File: return "file";
    }
    return "?";
}

bool ExperimentConfig::is_population_kind() const {
    return kind == ExperimentKind::Nonlinear || kind == ExperimentKind::Linear ||
           kind == ExperimentKind::QuasiInvariantSweep || kind == ExperimentKind::MetricStudy;
}

bool ExperimentConfig::is_particle_kind() const { return !is_population_kind(); }

ConfigParse parse_config(const std::string& text) {
    Parser p;
    tokenize(text, p);

    ExperimentConfig cfg;

    if (!p.has("kind")) {
        p.issues.push_back({0, 0, false,
                            "missing required key 'kind' (nonlinear | linear | fokker-planck | "
                            "quasi-invariant-sweep | tail-study | metric-study)"});
    }
    p.read_enum("kind", cfg.kind,
                {{"nonlinear", ExperimentKind::Nonlinear},
                 {"linear", ExperimentKind::Linear},
                 {"fokker-planck", ExperimentKind::FokkerPlanck},
                 {"quasi-invariant-sweep", ExperimentKind::QuasiInvariantSweep},
                 {"tail-study", ExperimentKind::TailStudy},
                 {"metric-study", ExperimentKind::MetricStudy}});

    // Sweep comparisons start from two-point data unless the config overrides.
    if (cfg.kind == ExperimentKind::QuasiInvariantSweep) cfg.initial = InitialKind::TwoPoint;
    if (cfg.is_particle_kind()) cfg.initial = InitialKind::Point;

    p.read_u64("seed", cfg.seed);
    p.read_path("output_dir", cfg.output_dir);
    p.read_int("output_precision", cfg.output_precision);
    {
        std::uint64_t w = cfg.workers;
        p.read_u64("workers", w);
        if (w > 4096) {
            p.semantic_error("workers", "worker count is unreasonably large");
        } else {
            cfg.workers = static_cast<unsigned>(w);
        }
    }
    p.read_size("agents", cfg.agents);
    p.read_double("horizon", cfg.horizon);
    p.read_double("snapshot_interval", cfg.snapshot_interval);

    p.read_enum("initial", cfg.initial,
                {{"point", InitialKind::Point},
                 {"two-point", InitialKind::TwoPoint},
                 {"uniform", InitialKind::Uniform},
                 {"exponential", InitialKind::Exponential},
                 {"file", InitialKind::File}});
    p.read_path("initial_snapshot", cfg.initial_snapshot);
    p.read_double("initial_x", cfg.initial_x);
    p.read_double("initial_y", cfg.initial_y);
    p.read_double("initial_dx", cfg.initial_dx);
    p.read_double("initial_dy", cfg.initial_dy);
    p.read_double("initial_v", cfg.initial_v);
    p.read_double("initial_w", cfg.initial_w);

    // Trade parameters.
    double lambda = cfg.trade.lambda;
    double alpha = cfg.trade.utility.alpha;
    p.read_double("lambda", lambda);
    p.read_double("alpha", alpha);
    cfg.trade.lambda = lambda;
    cfg.trade.utility = UtilityParams::from_alpha(alpha);

    NoiseKind noise_kind = NoiseKind::DegenerateZero;
    p.read_enum("noise", noise_kind,
                {{"none", NoiseKind::DegenerateZero},
                 {"uniform", NoiseKind::UniformSymmetric},
                 {"truncated-gaussian", NoiseKind::TruncatedGaussian}});
    double noise_delta = 0.0;
    p.read_double("noise_delta", noise_delta);
    cfg.trade.noise = NoiseSpec{noise_kind, noise_kind == NoiseKind::DegenerateZero ? 0.0 : noise_delta};

    p.read_enum("trade_variant", cfg.trade.variant,
                {{"difference", TradeVariant::EdgeworthDifference},
                 {"proportional", TradeVariant::EdgeworthProportional}});

    ExponentRandomization::Kind exp_kind = ExponentRandomization::Kind::None;
    p.read_enum("exponent_randomization", exp_kind,
                {{"none", ExponentRandomization::Kind::None},
                 {"uniform", ExponentRandomization::Kind::Uniform}});
    if (exp_kind == ExponentRandomization::Kind::Uniform) {
        double lo = 0.0;
        double hi = 0.0;
        p.read_double("exponent_lo", lo);
        p.read_double("exponent_hi", hi);
        cfg.trade.exponents = ExponentRandomization::uniform(lo, hi);
    }

    p.read_enum("selection", cfg.selection,
                {{"uniform", SelectionScheme::Uniform}, {"sweep", SelectionScheme::Sweep}});

    // Diffusion parameters share lambda/alpha keys.
    cfg.fp.lambda = lambda;
    cfg.fp.alpha = alpha;
    cfg.fp.beta = 1.0 - alpha;
    p.read_double("sigma1_sq", cfg.fp.sigma1_sq);
    p.read_double("sigma2_sq", cfg.fp.sigma2_sq);
    p.read_double("dtau", cfg.fp.dtau);

    p.read_double_list("moment_orders", cfg.moment_orders);
    p.read_double_list("epsilons", cfg.epsilons);
    p.read_double("tail_fraction", cfg.tail_fraction);
    p.read_double("metric_s", cfg.metric_s);
    p.read_double("grid_lo", cfg.grid_lo);
    p.read_double("grid_hi", cfg.grid_hi);
    p.read_int("grid_per_ray", cfg.grid_per_ray);
    p.read_double("reference_horizon", cfg.reference_horizon);

    // Semantic checks only make sense once the kind itself parsed.
    const bool kind_ok =
        p.has("kind") && std::none_of(p.issues.begin(), p.issues.end(), [&](const ConfigIssue& i) {
            return i.syntax && p.entries.count("kind") && i.line == p.entries.at("kind").line;
        });
    if (kind_ok) validate(p, cfg);

    ConfigParse result;
    result.issues = std::move(p.issues);
    std::sort(result.issues.begin(), result.issues.end(),
              [](const ConfigIssue& a, const ConfigIssue& b) {
                  return std::tie(a.line, a.col, a.message) < std::tie(b.line, b.col, b.message);
              });
    if (result.issues.empty()) result.config = std::move(cfg);
    return result;
}

ConfigParse parse_config_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        ConfigParse result;
        result.issues.push_back({0, 0, true, "cannot open config file " + file.string()});
        return result;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ExperimentConfig parse_config_or_throw(const std::string& text) {
    auto parsed = parse_config(text);
    if (parsed.ok()) return *parsed.config;
    std::string joined;
    for (const auto& issue : parsed.issues) {
        if (!joined.empty()) joined += "\n";
        joined += issue.render();
    }
    throw std::invalid_argument(joined);
}

std::string ConfigIssue::render() const {
    std::string out = syntax ? "syntax error" : "config error";
    if (line > 0) {
        out += " at line " + std::to_string(line) + ", column " + std::to_string(col);
    }
    out += ": " + message;
    return out;
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    auto emit = [&out](const std::string& key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    auto emit_d = [&emit](const std::string& key, double v) { emit(key, format_double(v)); };
    auto emit_list = [&emit](const std::string& key, const std::vector<double>& vs) {
        std::string joined;
        for (double v : vs) {
            if (!joined.empty()) joined += ",";
            joined += format_double(v);
        }
        emit(key, joined);
    };

    emit("kind", to_string(kind));
    emit("agents", std::to_string(agents));
    emit_d("horizon", horizon);
    emit_d("snapshot_interval", snapshot_interval);
    emit("initial", to_string(initial));
    if (initial == InitialKind::File) emit("initial_snapshot", initial_snapshot.string());

    if (is_population_kind()) {
        if (initial != InitialKind::File) {
            emit_d("initial_x", initial_x);
            emit_d("initial_y", initial_y);
            if (initial == InitialKind::TwoPoint || initial == InitialKind::Uniform) {
                emit_d("initial_dx", initial_dx);
                emit_d("initial_dy", initial_dy);
            }
        }
        emit_d("lambda", trade.lambda);
        emit_d("alpha", trade.utility.alpha);
        switch (trade.noise.kind) {
            case NoiseKind::DegenerateZero: emit("noise", "none"); break;
            case NoiseKind::UniformSymmetric: emit("noise", "uniform"); break;
            case NoiseKind::TruncatedGaussian: emit("noise", "truncated-gaussian"); break;
        }
        if (trade.noise.kind != NoiseKind::DegenerateZero) emit_d("noise_delta", trade.noise.delta);
        emit("trade_variant", trade.variant == TradeVariant::EdgeworthDifference
                                  ? "difference"
                                  : "proportional");
        if (trade.exponents.kind == ExponentRandomization::Kind::Uniform) {
            emit("exponent_randomization", "uniform");
            emit_d("exponent_lo", trade.exponents.lo);
            emit_d("exponent_hi", trade.exponents.hi);
        } else {
            emit("exponent_randomization", "none");
        }
        emit("selection", selection == SelectionScheme::Uniform ? "uniform" : "sweep");
    } else {
        if (initial != InitialKind::File) {
            emit_d("initial_v", initial_v);
            emit_d("initial_w", initial_w);
        }
        emit_d("lambda", fp.lambda);
        emit_d("alpha", fp.alpha);
        emit_d("sigma1_sq", fp.sigma1_sq);
        emit_d("sigma2_sq", fp.sigma2_sq);
        emit_d("dtau", fp.dtau);
        emit_list("moment_orders", moment_orders);
    }

    if (kind == ExperimentKind::QuasiInvariantSweep) emit_list("epsilons", epsilons);
    if (kind == ExperimentKind::TailStudy) emit_d("tail_fraction", tail_fraction);
    if (kind == ExperimentKind::MetricStudy) {
        emit_d("metric_s", metric_s);
        emit_d("grid_lo", grid_lo);
        emit_d("grid_hi", grid_hi);
        emit("grid_per_ray", std::to_string(grid_per_ray));
        emit_d("reference_horizon", reference_horizon);
    }

    emit("seed", std::to_string(seed));
    emit("output_precision", std::to_string(output_precision));
    emit("workers", std::to_string(workers));
    return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t ExperimentConfig::config_hash() const { return fnv1a64(canonical_text()); }

}  // namespace kinex
