#include "opt/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "core/errors.hpp"

namespace sca {

double grad_global_norm(const GradMap& grads) {
    double sq = 0.0;
    for (const auto& [name, g] : grads)
        for (size_t i = 0; i < g.size(); ++i) sq += g.at(i) * g.at(i);
    return std::sqrt(sq);
}

double clip_gradients(GradMap& grads, double max_norm) {
    if (max_norm <= 0.0) throw ConfigError("clip_gradients: max_norm must be positive");
    double norm = grad_global_norm(grads);
    if (norm > max_norm) {
        double s = max_norm / norm;
        for (auto& [name, g] : grads)
            for (size_t i = 0; i < g.size(); ++i) g.at(i) *= s;
    }
    return norm;
}

void AdamState::step(ParamStore& params, const GradMap& grads, double rate) {
    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, double(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, double(step_));
    for (const auto& [name, g] : grads) {
        Tensor& p = params.get(name);
        if (!p.same_shape(g))
            throw ShapeError("adam: gradient shape " + g.shape_str() + " does not match parameter " +
                             name + " " + p.shape_str());
        if (!g.all_finite()) throw NumericError("adam: non-finite gradient for parameter " + name);
        auto mit = m_.find(name);
        if (mit == m_.end()) {
            mit = m_.emplace(name, Tensor(p.rows(), p.cols())).first;
            v_.emplace(name, Tensor(p.rows(), p.cols()));
        }
        Tensor& m = mit->second;
        Tensor& v = v_.at(name);
        for (size_t i = 0; i < p.size(); ++i) {
            double gi = g.at(i);
            m.at(i) = cfg_.beta1 * m.at(i) + (1.0 - cfg_.beta1) * gi;
            v.at(i) = cfg_.beta2 * v.at(i) + (1.0 - cfg_.beta2) * gi * gi;
            double mhat = m.at(i) / bc1;
            double vhat = v.at(i) / bc2;
            p.at(i) -= rate * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p.at(i));
        }
    }
}

void AdamState::restore(std::map<std::string, Tensor> m, std::map<std::string, Tensor> v,
                        long step) {
    if (step < 0) throw ContractError("adam restore: negative step count");
    m_ = std::move(m);
    v_ = std::move(v);
    step_ = step;
}

double lr_at(const Schedule& sched, int epoch) {
    if (sched.s < 1) throw ConfigError("lr schedule: step size must be >= 1");
    if (sched.gamma <= 0.0 || sched.gamma > 1.0)
        throw ConfigError("lr schedule: decay factor must be in (0, 1]");
    if (epoch < 0) throw ContractError("lr_at: negative epoch");
    return sched.eta0 * std::pow(sched.gamma, double(epoch / sched.s));
}

double afe_eta(const AfeSchedule& sched, int epoch) {
    if (sched.eta_start > 0.0) throw ConfigError("mask schedule: eta_start must be <= 0");
    if (sched.hold_frac < 0.0 || sched.hold_frac > 1.0)
        throw ConfigError("mask schedule: hold fraction must be in [0, 1]");
    if (sched.total_epochs < 1) throw ConfigError("mask schedule: total epochs must be >= 1");
    if (epoch < 0 || epoch > sched.total_epochs)
        throw ContractError("afe_eta: epoch outside [0, total_epochs]");
    if (epoch >= sched.total_epochs) return 0.0;
    double hold_end = sched.hold_frac * sched.total_epochs;
    if (double(epoch) < hold_end) return sched.eta_start;
    double span = sched.total_epochs - hold_end;
    double t = (double(epoch) - hold_end) / span;
    return sched.eta_start * (1.0 + std::cos(std::numbers::pi * t)) / 2.0;
}

TrainResult train_loop(ParamStore& params, AdamState& state,
                       const std::function<Var(Tape&, int)>& build_loss, const Schedule& lr,
                       int epochs, double clip_norm,
                       const std::function<void(int, double)>& on_epoch) {
    if (epochs < 0) throw ContractError("train_loop: negative epoch count");
    TrainResult result;
    result.loss_history.reserve(size_t(epochs));
    for (int e = 0; e < epochs; ++e) {
        Tape tape(&params);
        Var loss = build_loss(tape, e);
        double lv = tape.val(loss).item();
        if (!std::isfinite(lv)) throw NumericError("training aborted: non-finite loss at epoch " +
                                                   std::to_string(e));
        GradMap grads = tape.backward(loss);
        clip_gradients(grads, clip_norm);
        state.step(params, grads, lr_at(lr, e));
        result.loss_history.push_back(lv);
        if (on_epoch) on_epoch(e, lv);
    }
    result.final_step = state.step_count();
    return result;
}

}  // namespace sca
