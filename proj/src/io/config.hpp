#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sca {

// Flat experiment description. One config drives one run; defaults depend on
// the experiment named by the section header, so an empty section is a
// complete recipe.
struct ExperimentConfig {
    std::string experiment;  // regress|image|afe|heatmap|poisson1d|poisson2d|pb3d|appendix
    std::uint64_t seed = 0;
    std::string variant = "rff-ca";  // rff-nn | rff-ca | nn-ca

    // frequency bank
    int m_base = 128;
    int k_scales = 3;
    double sigma = 0.05;
    double beta0 = 0.1;
    std::vector<double> mean_shift;  // empty = origin

    // attention net / dense baseline
    int d_q = 64;
    int n_heads = 4;
    int layers = 4;
    int width = 0;  // rff-nn hidden width; 0 = capacity-matched to the attention stack

    // low-frequency companion net (mixtures)
    int low_width = 64;
    int low_depth = 3;

    // training
    int epochs = 1000;
    int batch = 0;  // 0 = full batch
    double eta0 = 1e-3;
    int lr_step = 1000000000;
    double lr_gamma = 1.0;
    double clip = 1.0;
    double weight_decay = 0.0;

    // pde
    double gamma = 1e4;
    int n_r = 1000;
    int n_b = 1;  // per side for boxes
    double fd_step = 1e-4;
    std::string alpha = "fixed";  // fixed | learnable | optimal
    double alpha_value = 0.0;
    double nu = 100.0;  // poisson1d mode parameter
    double mu = 50.0;   // poisson2d / pb3d oscillation parameter
    std::string objective = "pinn";  // heatmap: regression | ritz | pinn

    // regression / image targets
    std::string target = "f1";  // f1 | f2 | f3
    int grid = 500;             // test-grid resolution per axis
    int n_train = 2048;
    int n_test = 4096;
    std::string image;  // PPM path for the image experiment
    int downsample = 4;
    long pixel_budget = 4194304;  // full-batch memory guard

    // adaptive enhancement
    double lambda = 0.02;
    int e1 = 5000;
    int e2 = 5000;
    double eta_start = -6.0;
    double hold_frac = 0.7;
    int n_fft = 4096;

    // appendix toy dynamics
    int k_mode = 20;
    double c_target = 1.0;
    int order = 2;  // loss derivative order m
    double toy_eta = 1e-8;
    int toy_steps = 4000;

    // artifacts
    std::string out_dir;  // empty = derived from experiment and seed
    int record_every = 10;
    int checkpoint_every = 0;  // 0 = final checkpoint only

    bool operator==(const ExperimentConfig&) const = default;
};

// Parses the sectioned key=value format. The single section header names the
// experiment; keys are flat; '#' starts a comment. Errors carry line numbers.
ExperimentConfig parse_config(const std::string& text);

// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

// Recipe defaults for one experiment name (what an empty section means).
ExperimentConfig default_config(const std::string& experiment);

const std::vector<std::string>& experiment_names();

}  // namespace sca
