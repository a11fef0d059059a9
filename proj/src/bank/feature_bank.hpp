#pragma once

#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace sca {

// Multiscale random Fourier bank. Base frequencies are drawn once; the
// scaled bank stacks dyadic copies 2^k * omega_base for k = 0..K in
// scale-major order (flat index k*M_base + m). Only the envelope sharpness
// trains; frequencies and phases stay fixed.
struct FrequencyBank {
    Tensor omega_base; // M_base x d_in
    int K = 0;
    Tensor phases; // 1 x M
    double sigma = 1.0;

    int M_base() const { return omega_base.rows(); }
    int d_in() const { return omega_base.cols(); }
    int M() const { return M_base() * (K + 1); }
};

FrequencyBank build_bank(int d_in, int M_base, int K, double sigma, Rng rng,
                         const std::vector<double>& mean_shift = {});

// Row i = 2^k * omega_base row m for i = k*M_base + m.
Tensor scaled_frequencies(const FrequencyBank& bank);
// Euclidean norm of each scaled frequency row, as a 1 x M row.
Tensor frequency_norms(const FrequencyBank& bank);

// Inverse of softplus: value v with log(1+e^v) = beta0.
double beta_raw_init(double beta0);

void register_bank_params(const FrequencyBank& bank, ParamStore& store,
                          const std::string& beta_name = "bank.beta_raw", double beta0 = 0.1,
                          bool trainable = true);

// Batched feature matrix (N x M) on the tape:
//   phi = sqrt(1/M) * exp(-softplus(beta_raw)*||w_i||) * cos(X w_i^T + b_i)
// The cosine branch is constant; gradients flow only through the envelope.
Var bank_features(Tape& tape, const FrequencyBank& bank, const Tensor& X, const std::string& beta_name);

// Direct evaluation for one input row with an explicit envelope sharpness.
Tensor rff_features(const FrequencyBank& bank, double beta, const Tensor& x_row);

enum class TokenTag { kBase, kPosterior };

struct TokenBank {
    Tensor tokens; // N_tok x d_q (empty tensor = no tokens)
    struct Group {
        int begin = 0;
        int end = 0;
        TokenTag tag = TokenTag::kBase;
    };
    std::vector<Group> groups;

    int n_tokens() const { return tokens.size() == 0 ? 0 : tokens.rows(); }
    int d_q() const { return tokens.size() == 0 ? 0 : tokens.cols(); }
};

// Row-major regrouping of a flat feature vector into ceil(F/d_q) rows,
// zero-padding the tail.
TokenBank tokenize(const Tensor& features_row, int d_q, TokenTag tag);

// Base rows first, posterior rows appended; group ranges shift accordingly.
TokenBank augment(const TokenBank& base, const TokenBank& post);

// Harmonics retained after thresholding: frequency of entry k is exactly
// 2*k*pi on the period-1 domain.
struct PosteriorBank {
    std::vector<int> k_post; // ascending
    Tensor phases;           // 1 x M_post

    int M_post() const { return static_cast<int>(k_post.size()); }
};

PosteriorBank build_posterior_bank(const std::vector<int>& k_post, Rng rng);

// sqrt(2/M_post) * cos(2*k*pi*x + b_k); no amplitude envelope.
Tensor posterior_features(const PosteriorBank& pbank, double x);
// Batched version; enters the tape as a constant leaf.
Var posterior_features_on_tape(Tape& tape, const PosteriorBank& pbank, const Tensor& X);

// Split a batched feature matrix (N x F) into per-token N x d_q slices,
// zero-padding F up to a multiple of d_q. Token j holds feature columns
// [j*d_q, (j+1)*d_q), matching the per-sample reshape.
std::vector<Var> split_tokens(Tape& tape, Var features, int d_q);

} // namespace sca
