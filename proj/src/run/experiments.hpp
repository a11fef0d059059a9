#pragma once

#include <string>
#include <vector>

#include "io/config.hpp"

namespace sca {

struct RunOptions {
    std::string out_root;      // overrides the SPECTRA_CA_OUT environment root
    bool force = false;        // overwrite an existing run directory
    std::string resume_from;   // checkpoint path to continue from
};

struct RunSummary {
    std::string out_dir;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> history;  // rows at the record cadence
    int epochs_completed = 0;
    std::vector<int> k_post;                   // harmonics added by the enhancement stage

    // Last recorded value of a metric column.
    double final_value(const std::string& column) const;
};

// Executes one experiment end to end and writes the artifact set
// (config.ini, manifest.txt, metrics.csv, prediction.csv, spectrum.csv,
// checkpoints) into the run directory. Returns the recorded history.
RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Metric columns for an experiment name (fixed schema per experiment).
std::vector<std::string> metric_columns(const std::string& experiment);

// Output directory resolution: explicit root > SPECTRA_CA_OUT > current
// directory; leaf defaults to runs/<experiment>-seed<seed>.
std::string resolve_out_dir(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace sca
