#pragma once

// Experiment orchestration: takes a validated configuration, runs the
// requested tier, and writes a self-describing output directory:
//
//   <out>/manifest        run identity: versions, seed, config hash, resolved config
//   <out>/snapshots/      population or particle state CSVs
//   <out>/moments.csv     time series of the tracked summary statistics
//   <out>/report.txt      audits (conservation, clamps/skips, metric/tail results)
//   <out>/plots/          two-column data files, one per figure
//   <out>/distance_vs_epsilon.csv   (scaling sweep only)
//
// Nothing written depends on wall-clock state: identical config + seed produce
// byte-identical directories in single-worker mode.

#include <filesystem>
#include <vector>

#include "kinex/config.hpp"

namespace kinex {

struct ExperimentResult {
    std::filesystem::path out_dir;
    std::vector<std::filesystem::path> files_written;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace kinex
