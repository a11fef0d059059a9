#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "core/tape.hpp"

namespace sca {

// Global L2 norm over all gradient tensors in the map.
double grad_global_norm(const GradMap& grads);

// In-place global-norm clipping. Returns the pre-clip norm.
double clip_gradients(GradMap& grads, double max_norm = 1.0);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled, AdamW-style; 0 recovers plain Adam
};

class AdamState {
public:
    explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

    // One bias-corrected update of every parameter present in grads.
    // Moments are created lazily, zero-initialized, shaped like the parameter.
    void step(ParamStore& params, const GradMap& grads, double rate);

    long step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    const std::map<std::string, Tensor>& first_moments() const { return m_; }
    const std::map<std::string, Tensor>& second_moments() const { return v_; }

    // Checkpoint restore: replaces moments and step counter wholesale.
    void restore(std::map<std::string, Tensor> m, std::map<std::string, Tensor> v, long step);

private:
    AdamConfig cfg_;
    std::map<std::string, Tensor> m_;
    std::map<std::string, Tensor> v_;
    long step_ = 0;
};

// Stepwise decay: rate(epoch) = eta0 * gamma^floor(epoch / s).
struct Schedule {
    double eta0 = 1e-3;
    int s = 1000000000;  // effectively constant unless configured
    double gamma = 1.0;
};

double lr_at(const Schedule& sched, int epoch);

// Mask-strength release: hold at eta_start for the first hold_frac of the
// run, then raise to 0 along a half-cosine. Non-decreasing, ends at 0.
struct AfeSchedule {
    double eta_start = -6.0;
    double hold_frac = 0.7;
    int total_epochs = 1;
};

double afe_eta(const AfeSchedule& sched, int epoch);

struct TrainResult {
    std::vector<double> loss_history;  // one entry per completed epoch
    long final_step = 0;
};

// Minimal sequential training loop: build loss on a fresh tape each epoch,
// backward, clip, Adam step. build_loss receives the epoch index so the
// caller can resample batches or apply schedules. on_epoch (optional) runs
// after the parameter update with the epoch's loss value.
TrainResult train_loop(ParamStore& params, AdamState& state,
                       const std::function<Var(Tape&, int)>& build_loss,
                       const Schedule& lr, int epochs, double clip_norm = 1.0,
                       const std::function<void(int, double)>& on_epoch = {});

}  // namespace sca
