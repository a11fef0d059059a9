#pragma once

#include <string>
#include <vector>

#include "bank/feature_bank.hpp"
#include "core/rng.hpp"
#include "core/tape.hpp"

namespace sca {

// Query seed: psi(x) = x (latent) or psi(x) = phi(x) (fourier).
enum class InitMode { kLatent, kFourier };

// Additive attention-logit offsets per token group. Base tokens always get
// zero; posterior tokens get eta <= 0 (0 = fully open, very negative =
// effectively removed from the softmax).
struct AttnMask {
    double posterior_eta = 0.0;
};

struct NetConfig {
    int d_in = 1;
    int d_out = 1;
    int d_q = 64;
    int n_heads = 4;
    int L = 4;
    InitMode init_mode = InitMode::kFourier;
};

// Cross-attention residual stack. A single query token per input attends
// over the RFF token bank; weights are shared across tokens, so the
// parameter count does not depend on the token count.
struct CrossAttnNet {
    NetConfig cfg;
    FrequencyBank bank;
    std::string prefix = "net.";
    std::string beta_name = "bank.beta_raw";
};

CrossAttnNet init_net(const NetConfig& cfg, FrequencyBank bank, ParamStore& store, Rng rng,
                      const std::string& prefix = "net.", const std::string& beta_name = "bank.beta_raw");

// Batched forward pass: returns an N x d_out Var. Posterior tokens are
// appended when post is non-null; mask offsets apply to them.
Var net_forward(Tape& tape, const CrossAttnNet& net, const Tensor& X,
                const PosteriorBank* post = nullptr, const AttnMask* mask = nullptr);

// One attention layer over an explicit token list (each token an N x d_q
// Var) with per-token additive logit offsets.
Var cross_attention_batch(Tape& tape, const CrossAttnNet& net, int layer, Var Q,
                          const std::vector<Var>& tokens, const std::vector<double>& offsets);

// Value-only conveniences over a scratch tape.
Tensor initial_latent(ParamStore& store, const CrossAttnNet& net, const Tensor& x_row);
Tensor cross_attention(ParamStore& store, const CrossAttnNet& net, int layer, const Tensor& q_row,
                       const TokenBank& H, const AttnMask& mask);
Tensor net_eval(ParamStore& store, const CrossAttnNet& net, const Tensor& X,
                const PosteriorBank* post = nullptr, const AttnMask* mask = nullptr);

std::vector<double> token_offsets(const std::vector<TokenTag>& tags, const AttnMask& mask);

// Non-attentive baseline: phi(x) through depth dense tanh layers of equal
// width, then a linear head. Shares the bank (and its envelope parameter)
// with the attention variant.
struct RffNn {
    FrequencyBank bank;
    int d_out = 1;
    int width = 0;
    int depth = 0;
    std::string prefix = "rffnn.";
    std::string beta_name = "bank.beta_raw";
};

RffNn init_rff_nn(FrequencyBank bank, int d_out, int width, int depth, ParamStore& store, Rng rng,
                  const std::string& prefix = "rffnn.", const std::string& beta_name = "bank.beta_raw");

Var rff_nn_forward(Tape& tape, const RffNn& net, const Tensor& X);
Tensor rff_nn_eval(ParamStore& store, const RffNn& net, const Tensor& X);

// Plain coordinate MLP (no feature bank): depth dense tanh layers of equal
// width on the raw input, then a linear head.
struct DenseNet {
    int d_in = 1;
    int d_out = 1;
    int width = 64;
    int depth = 3;
    std::string prefix = "dense.";
};

DenseNet init_dense_net(int d_in, int d_out, int width, int depth, ParamStore& store, Rng rng,
                        const std::string& prefix = "dense.");

Var dense_net_forward(Tape& tape, const DenseNet& net, const Tensor& X);
Tensor dense_net_eval(ParamStore& store, const DenseNet& net, const Tensor& X);

// Hidden width whose dense-stack parameter count best matches the
// attention stack of cfg over an M-feature bank.
int matched_width(const NetConfig& cfg, int M);

size_t param_entry_count(const ParamStore& store, const std::string& prefix);

} // namespace sca
