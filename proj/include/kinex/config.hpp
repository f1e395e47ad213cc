#pragma once

// Experiment configuration: a line-oriented `key = value` format with `#`
// comments. Parsing reports syntax errors with line/column and collects every
// semantic violation (naming the broken invariant) instead of stopping at the
// first.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kinex/ensemble.hpp"
#include "kinex/fokker_planck.hpp"
#include "kinex/trade.hpp"

namespace kinex {

enum class ExperimentKind {
    Nonlinear,          // pairwise-interaction population run
    Linear,             // mean-field population run
    FokkerPlanck,       // diffusion-limit particle run
    QuasiInvariantSweep,  // small-trade scaling sweep against the diffusion oracle
    TailStudy,          // tail-index and moment-growth study on the particle tier
    MetricStudy,        // Fourier-metric monotonicity study on the mean-field run
};

std::string to_string(ExperimentKind kind);

enum class InitialKind { Point, TwoPoint, Uniform, Exponential, File };

std::string to_string(InitialKind kind);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Nonlinear;

    // Population / particles.
    std::size_t agents = 1000;
    double horizon = 1.0;
    double snapshot_interval = 0.0;  // 0 = initial and final only
    SelectionScheme selection = SelectionScheme::Uniform;

    // Trade parameters (population kinds).
    TradeParams trade{};

    // Diffusion parameters (particle kinds).
    FpParams fp{.lambda = 0.5, .alpha = 0.5, .beta = 0.5,
                .sigma1_sq = 0.1, .sigma2_sq = 0.1, .dtau = 0.0};

    // Initial data.
    InitialKind initial = InitialKind::Exponential;
    double initial_x = 1.0;
    double initial_y = 1.0;
    double initial_dx = 0.25;  // two-point offset / uniform half-width
    double initial_dy = 0.25;
    double initial_v = 2.0;  // particle kinds
    double initial_w = 1.0;
    std::filesystem::path initial_snapshot;  // initial = file

    // Sweep / analysis controls.
    std::vector<double> epsilons{0.5, 0.1, 0.02};
    double tail_fraction = 0.05;
    std::vector<double> moment_orders{1.5, 3.5};
    double metric_s = 2.0;
    double grid_lo = 0.0;  // 0 = auto: noise-aware floor from the ensemble size
    double grid_hi = 10.0;
    int grid_per_ray = 64;
    double reference_horizon = 0.0;  // 0 = 4 * horizon

    // Run plumbing.
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    int output_precision = 17;
    unsigned workers = 1;

    bool is_population_kind() const;
    bool is_particle_kind() const;
    double resolved_reference_horizon() const {
        return reference_horizon > 0.0 ? reference_horizon : 4.0 * horizon;
    }
    // The s-weighted empirical-CF ratio carries sampling noise growing like
    // 1 / (sqrt(agents) * |omega|) toward the origin; the auto floor pins that
    // contribution at 2% so the metric regression measures dynamics, not noise.
    double resolved_grid_lo() const {
        return grid_lo > 0.0
                   ? grid_lo
                   : std::max(1e-3, 50.0 / std::sqrt(static_cast<double>(agents)));
    }

    // Every applicable key with its resolved value, fixed order — the
    // reproducibility fingerprint.
    std::string canonical_text() const;
    std::uint64_t config_hash() const;  // FNV-1a 64 over canonical_text()
};

struct ConfigIssue {
    int line = 0;  // 0 = not tied to a specific line (e.g. missing required key)
    int col = 0;
    bool syntax = false;  // false = semantic (invariant violation)
    std::string message;

    std::string render() const;
};

struct ConfigParse {
    std::optional<ExperimentConfig> config;  // engaged iff issues is empty
    std::vector<ConfigIssue> issues;

    bool ok() const { return issues.empty(); }
};

ConfigParse parse_config(const std::string& text);
ConfigParse parse_config_file(const std::filesystem::path& file);

// Convenience for programmatic use: throws std::invalid_argument joining all
// issues when the text does not validate.
ExperimentConfig parse_config_or_throw(const std::string& text);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace kinex
