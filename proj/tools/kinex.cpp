// Command-line front end: validates configuration files and orchestrates
// simulation/analysis runs.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime simulation error,
// 4 I/O error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kinex/config.hpp"
#include "kinex/experiment.hpp"
#include "kinex/snapshot_io.hpp"
#include "kinex/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIo = 4;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> workers;
};

// Precedence: command-line flag > environment variable > config file.
// Only the seed and the output directory honor environment overrides.
int apply_overrides(kinex::ExperimentConfig& cfg, const Overrides& opt) {
    if (const char* env = std::getenv("KINEX_SEED"); env && *env) {
        std::string value(env);
        if (value.find_first_not_of("0123456789") != std::string::npos) {
            std::cerr << "KINEX_SEED must be a non-negative integer (got '" << value << "')\n";
            return kExitConfig;
        }
        cfg.seed = std::strtoull(value.c_str(), nullptr, 10);
    }
    if (const char* env = std::getenv("KINEX_OUT_DIR"); env && *env) {
        cfg.output_dir = env;
    }
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.out_dir) {
        if (opt.out_dir->empty()) {
            std::cerr << "--out-dir must not be empty\n";
            return kExitConfig;
        }
        cfg.output_dir = *opt.out_dir;
    }
    if (opt.workers) {
        if (*opt.workers == 0) {
            std::cerr << "--workers must be at least 1\n";
            return kExitConfig;
        }
        cfg.workers = *opt.workers;
    }
    return kExitOk;
}

bool kind_matches_command(kinex::ExperimentKind kind, const std::string& command) {
    using kinex::ExperimentKind;
    if (command == "simulate") {
        return kind == ExperimentKind::Nonlinear || kind == ExperimentKind::Linear ||
               kind == ExperimentKind::FokkerPlanck;
    }
    if (command == "sweep") return kind == ExperimentKind::QuasiInvariantSweep;
    if (command == "analyze") {
        return kind == ExperimentKind::TailStudy || kind == ExperimentKind::MetricStudy;
    }
    return true;  // validate-config accepts every kind
}

std::string command_for_kind(kinex::ExperimentKind kind) {
    using kinex::ExperimentKind;
    switch (kind) {
        case ExperimentKind::Nonlinear:
        case ExperimentKind::Linear:
        case ExperimentKind::FokkerPlanck:
            return "simulate";
        case ExperimentKind::QuasiInvariantSweep:
            return "sweep";
        case ExperimentKind::TailStudy:
        case ExperimentKind::MetricStudy:
            return "analyze";
    }
    return "simulate";
}

int run_command(const std::string& command, const Overrides& opt) {
    auto parsed = kinex::parse_config_file(opt.config_path);
    if (!parsed.ok()) {
        std::cerr << opt.config_path << ": configuration invalid\n";
        for (const auto& issue : parsed.issues) {
            std::cerr << "  " << issue.render() << "\n";
        }
        return kExitConfig;
    }
    kinex::ExperimentConfig cfg = *parsed.config;
    if (const int rc = apply_overrides(cfg, opt); rc != kExitOk) return rc;

    if (!kind_matches_command(cfg.kind, command)) {
        std::cerr << "experiment kind '" << kinex::to_string(cfg.kind) << "' is run by the '"
                  << command_for_kind(cfg.kind) << "' subcommand, not '" << command << "'\n";
        return kExitConfig;
    }

    if (command == "validate-config") {
        char hash[24];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(cfg.config_hash()));
        std::cout << "configuration OK\n"
                  << "config_hash = " << hash << "\n"
                  << "--- resolved configuration ---\n"
                  << cfg.canonical_text();
        return kExitOk;
    }

    try {
        const auto result = kinex::run_experiment(cfg);
        std::cout << "wrote " << result.files_written.size() << " files under "
                  << result.out_dir.string() << "\n";
        return kExitOk;
    } catch (const kinex::IoError& err) {
        std::cerr << "I/O error: " << err.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& err) {
        std::cerr << "I/O error: " << err.what() << "\n";
        return kExitIo;
    } catch (const std::exception& err) {
        std::cerr << "simulation error: " << err.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("kinex ") + kinex::kVersion +
                 " - kinetic two-good exchange simulator and analysis toolkit"};
    app.require_subcommand(1);

    Overrides opt;
    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("config", opt.config_path, "experiment configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "override the random seed");
        sub->add_option("--out-dir", opt.out_dir, "override the output directory");
        sub->add_option("--workers", opt.workers, "worker thread count");
    };

    add_common(app.add_subcommand("simulate",
                                  "run a population or particle simulation to its horizon"));
    add_common(app.add_subcommand("analyze", "run a tail or Fourier-metric study"));
    add_common(app.add_subcommand("sweep", "run the small-trade scaling sweep"));
    add_common(app.add_subcommand("validate-config",
                                  "parse and validate a configuration, print the resolved form"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    return run_command(app.get_subcommands().front()->get_name(), opt);
}
