#include "bank/feature_bank.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace sca {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

FrequencyBank build_bank(int d_in, int M_base, int K, double sigma, Rng rng,
                         const std::vector<double>& mean_shift) {
    if (M_base < 1) throw ConfigError("build_bank: M_base must be >= 1, got " + std::to_string(M_base));
    if (K < 0) throw ConfigError("build_bank: K must be >= 0, got " + std::to_string(K));
    if (!(sigma > 0.0)) throw ConfigError("build_bank: sigma must be positive, got " + std::to_string(sigma));
    if (d_in < 1) throw ConfigError("build_bank: d_in must be >= 1, got " + std::to_string(d_in));
    if (!mean_shift.empty() && static_cast<int>(mean_shift.size()) != d_in) {
        throw ConfigError("build_bank: mean_shift length " + std::to_string(mean_shift.size()) +
                          " does not match d_in " + std::to_string(d_in));
    }

    FrequencyBank bank;
    bank.K = K;
    bank.sigma = sigma;
    bank.omega_base = Tensor(M_base, d_in);
    double inv_sigma = 1.0 / sigma;
    for (int m = 0; m < M_base; ++m) {
        for (int j = 0; j < d_in; ++j) {
            double mu = mean_shift.empty() ? 0.0 : mean_shift[j];
            bank.omega_base(m, j) = mu + inv_sigma * rng.gaussian();
        }
    }
    int M = M_base * (K + 1);
    bank.phases = Tensor(1, M);
    for (int i = 0; i < M; ++i) bank.phases.at(i) = rng.uniform(0.0, kTwoPi);
    return bank;
}

Tensor scaled_frequencies(const FrequencyBank& bank) {
    int M_base = bank.M_base();
    Tensor out(bank.M(), bank.d_in());
    for (int k = 0; k <= bank.K; ++k) {
        double f = std::ldexp(1.0, k); // exact power of two
        for (int m = 0; m < M_base; ++m) {
            for (int j = 0; j < bank.d_in(); ++j) {
                out(k * M_base + m, j) = f * bank.omega_base(m, j);
            }
        }
    }
    return out;
}

Tensor frequency_norms(const FrequencyBank& bank) {
    Tensor sf = scaled_frequencies(bank);
    Tensor out(1, sf.rows());
    for (int i = 0; i < sf.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < sf.cols(); ++j) s += sf(i, j) * sf(i, j);
        out(0, i) = std::sqrt(s);
    }
    return out;
}

double beta_raw_init(double beta0) {
    if (!(beta0 > 0.0)) throw ConfigError("beta_raw_init: beta0 must be positive");
    // softplus(v) = beta0  =>  v = log(e^beta0 - 1)
    return std::log(std::expm1(beta0));
}

void register_bank_params(const FrequencyBank& bank, ParamStore& store, const std::string& beta_name,
                          double beta0, bool trainable) {
    (void)bank;
    store.add(beta_name, Tensor::scalar(beta_raw_init(beta0)), trainable);
}

Var bank_features(Tape& tape, const FrequencyBank& bank, const Tensor& X, const std::string& beta_name) {
    if (X.cols() != bank.d_in()) {
        throw ShapeError("bank_features: input " + X.shape_str() + " does not match bank d_in " +
                         std::to_string(bank.d_in()));
    }
    int N = X.rows();
    int M = bank.M();

    Tensor sf = scaled_frequencies(bank);
    Tensor sf_t(sf.cols(), sf.rows());
    for (int r = 0; r < sf.rows(); ++r)
        for (int c = 0; c < sf.cols(); ++c) sf_t(c, r) = sf(r, c);

    Var Xv = tape.constant(X);
    Var freq_t = tape.constant(std::move(sf_t));
    Var ones_n = tape.constant(Tensor::full(N, 1, 1.0));
    Var phase_bcast = tape.matmul(ones_n, tape.constant(bank.phases));
    Var angles = tape.add(tape.matmul(Xv, freq_t), phase_bcast);
    Var cosines = tape.cos(angles); // constant branch: no parameter upstream

    Var beta = tape.softplus(tape.param(beta_name));
    Var env_row = tape.exp(tape.scale(tape.matmul(beta, tape.constant(frequency_norms(bank))), -1.0));
    Var env = tape.matmul(ones_n, env_row);

    return tape.scale(tape.mul(env, cosines), std::sqrt(1.0 / M));
}

Tensor rff_features(const FrequencyBank& bank, double beta, const Tensor& x_row) {
    if (x_row.rows() != 1 || x_row.cols() != bank.d_in()) {
        throw ShapeError("rff_features: expected 1x" + std::to_string(bank.d_in()) + " input, got " +
                         x_row.shape_str());
    }
    if (!x_row.all_finite()) throw NumericError("rff_features: non-finite input");
    Tensor sf = scaled_frequencies(bank);
    Tensor norms = frequency_norms(bank);
    int M = bank.M();
    Tensor out(1, M);
    double amp = std::sqrt(1.0 / M);
    for (int i = 0; i < M; ++i) {
        double angle = bank.phases.at(i);
        for (int j = 0; j < bank.d_in(); ++j) angle += sf(i, j) * x_row(0, j);
        out.at(i) = amp * std::exp(-beta * norms.at(i)) * std::cos(angle);
    }
    return out;
}

TokenBank tokenize(const Tensor& features_row, int d_q, TokenTag tag) {
    if (d_q < 1) throw ConfigError("tokenize: d_q must be >= 1");
    if (features_row.rows() != 1) {
        throw ShapeError("tokenize: expected a single feature row, got " + features_row.shape_str());
    }
    int F = features_row.cols();
    int n_tok = (F + d_q - 1) / d_q;
    TokenBank tb;
    tb.tokens = Tensor(n_tok, d_q);
    for (int i = 0; i < F; ++i) tb.tokens.at(i) = features_row.at(i);
    tb.groups.push_back({0, n_tok, tag});
    return tb;
}

TokenBank augment(const TokenBank& base, const TokenBank& post) {
    if (post.n_tokens() == 0) return base;
    if (base.n_tokens() == 0) return post;
    if (base.d_q() != post.d_q()) {
        throw ShapeError("augment: token width mismatch " + std::to_string(base.d_q()) + " vs " +
                         std::to_string(post.d_q()));
    }
    TokenBank out;
    out.tokens = Tensor(base.n_tokens() + post.n_tokens(), base.d_q());
    std::copy(base.tokens.data(), base.tokens.data() + base.tokens.size(), out.tokens.data());
    std::copy(post.tokens.data(), post.tokens.data() + post.tokens.size(),
              out.tokens.data() + base.tokens.size());
    out.groups = base.groups;
    int offset = base.n_tokens();
    for (const auto& g : post.groups) {
        out.groups.push_back({g.begin + offset, g.end + offset, g.tag});
    }
    return out;
}

PosteriorBank build_posterior_bank(const std::vector<int>& k_post, Rng rng) {
    if (k_post.empty()) throw ContractError("build_posterior_bank: empty harmonic set");
    for (size_t i = 1; i < k_post.size(); ++i) {
        if (k_post[i] <= k_post[i - 1]) {
            throw ContractError("build_posterior_bank: harmonics must be strictly ascending");
        }
    }
    PosteriorBank pb;
    pb.k_post = k_post;
    pb.phases = Tensor(1, static_cast<int>(k_post.size()));
    for (size_t i = 0; i < k_post.size(); ++i) pb.phases.at(i) = rng.uniform(0.0, kTwoPi);
    return pb;
}

Tensor posterior_features(const PosteriorBank& pbank, double x) {
    if (pbank.M_post() < 1) throw ContractError("posterior_features: empty bank");
    int M = pbank.M_post();
    Tensor out(1, M);
    double amp = std::sqrt(2.0 / M);
    for (int i = 0; i < M; ++i) {
        out.at(i) = amp * std::cos(kTwoPi * pbank.k_post[i] * x + pbank.phases.at(i));
    }
    return out;
}

Var posterior_features_on_tape(Tape& tape, const PosteriorBank& pbank, const Tensor& X) {
    if (pbank.M_post() < 1) throw ContractError("posterior_features_on_tape: empty bank");
    if (X.cols() != 1) {
        throw ShapeError("posterior_features_on_tape: expected single-column input, got " + X.shape_str());
    }
    Tensor feats(X.rows(), pbank.M_post());
    for (int r = 0; r < X.rows(); ++r) {
        Tensor row = posterior_features(pbank, X(r, 0));
        for (int c = 0; c < pbank.M_post(); ++c) feats(r, c) = row.at(c);
    }
    return tape.constant(std::move(feats));
}

std::vector<Var> split_tokens(Tape& tape, Var features, int d_q) {
    if (d_q < 1) throw ConfigError("split_tokens: d_q must be >= 1");
    const Tensor& f = tape.val(features);
    int F = f.cols();
    int n_tok = (F + d_q - 1) / d_q;
    Var padded = features;
    if (n_tok * d_q != F) {
        Var zeros = tape.constant(Tensor(f.rows(), n_tok * d_q - F));
        padded = tape.concat_cols(features, zeros);
    }
    std::vector<Var> tokens;
    tokens.reserve(n_tok);
    for (int j = 0; j < n_tok; ++j) {
        tokens.push_back(tape.slice_cols(padded, j * d_q, (j + 1) * d_q));
    }
    return tokens;
}

} // namespace sca
