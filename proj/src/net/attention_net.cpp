#include "net/attention_net.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace sca {

namespace {

Tensor glorot(Rng& rng, int fan_in, int fan_out) {
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w(fan_in, fan_out);
    for (size_t i = 0; i < w.size(); ++i) w.at(i) = rng.uniform(-limit, limit);
    return w;
}

std::string layer_name(const std::string& prefix, int l, const char* leaf) {
    return prefix + "l" + std::to_string(l) + "." + leaf;
}

// bias row broadcast over N rows: ones(N,1) * b(1,d)
Var broadcast_row(Tape& t, Var ones_n, Var row) { return t.matmul(ones_n, row); }

} // namespace

CrossAttnNet init_net(const NetConfig& cfg, FrequencyBank bank, ParamStore& store, Rng rng,
                      const std::string& prefix, const std::string& beta_name) {
    if (cfg.d_q < 1 || cfg.n_heads < 1 || cfg.L < 0 || cfg.d_out < 1 || cfg.d_in < 1) {
        throw ConfigError("init_net: bad dimensions");
    }
    if (cfg.d_q % cfg.n_heads != 0) {
        throw ConfigError("init_net: d_q " + std::to_string(cfg.d_q) + " not divisible by n_heads " +
                          std::to_string(cfg.n_heads));
    }
    if (bank.d_in() != cfg.d_in) {
        throw ConfigError("init_net: bank d_in " + std::to_string(bank.d_in()) + " does not match config d_in " +
                          std::to_string(cfg.d_in));
    }

    int psi_dim = cfg.init_mode == InitMode::kFourier ? bank.M() : cfg.d_in;
    store.add(prefix + "w0", glorot(rng, psi_dim, cfg.d_q));
    store.add(prefix + "b0", Tensor(1, cfg.d_q));
    for (int l = 0; l < cfg.L; ++l) {
        store.add(layer_name(prefix, l, "wq"), glorot(rng, cfg.d_q, cfg.d_q));
        store.add(layer_name(prefix, l, "wk"), glorot(rng, cfg.d_q, cfg.d_q));
        store.add(layer_name(prefix, l, "wv"), glorot(rng, cfg.d_q, cfg.d_q));
        store.add(layer_name(prefix, l, "wffn"), glorot(rng, cfg.d_q, cfg.d_q));
        store.add(layer_name(prefix, l, "bffn"), Tensor(1, cfg.d_q));
    }
    store.add(prefix + "wout", glorot(rng, cfg.d_q, cfg.d_out));
    store.add(prefix + "bout", Tensor(1, cfg.d_out));

    CrossAttnNet net;
    net.cfg = cfg;
    net.bank = std::move(bank);
    net.prefix = prefix;
    net.beta_name = beta_name;
    return net;
}

std::vector<double> token_offsets(const std::vector<TokenTag>& tags, const AttnMask& mask) {
    if (mask.posterior_eta > 0.0) {
        throw ContractError("token_offsets: posterior mask strength must be <= 0, got " +
                            std::to_string(mask.posterior_eta));
    }
    std::vector<double> offsets(tags.size());
    for (size_t i = 0; i < tags.size(); ++i) {
        offsets[i] = tags[i] == TokenTag::kPosterior ? mask.posterior_eta : 0.0;
    }
    return offsets;
}

Var cross_attention_batch(Tape& t, const CrossAttnNet& net, int layer, Var Q,
                          const std::vector<Var>& tokens, const std::vector<double>& offsets) {
    int n_tok = static_cast<int>(tokens.size());
    if (n_tok == 0) throw ContractError("cross_attention: empty token bank");
    if (offsets.size() != tokens.size()) {
        throw ContractError("cross_attention: offsets do not match token count");
    }
    bool any_open = false;
    for (double o : offsets) {
        if (std::isfinite(o)) {
            any_open = true;
        }
    }
    if (!any_open) throw ContractError("cross_attention: every token is masked out");

    int d_q = net.cfg.d_q;
    int n_heads = net.cfg.n_heads;
    int d_h = d_q / n_heads;
    int N = t.val(Q).rows();

    Var Qp = t.matmul(Q, t.param(layer_name(net.prefix, layer, "wq")));
    Var wk = t.param(layer_name(net.prefix, layer, "wk"));
    Var wv = t.param(layer_name(net.prefix, layer, "wv"));
    std::vector<Var> Kp, Vp;
    Kp.reserve(n_tok);
    Vp.reserve(n_tok);
    for (int j = 0; j < n_tok; ++j) {
        Kp.push_back(t.matmul(tokens[j], wk));
        Vp.push_back(t.matmul(tokens[j], wv));
    }

    bool masked = false;
    for (double o : offsets) {
        if (o != 0.0) masked = true;
    }
    Var mask_bcast;
    if (masked) {
        Tensor offs(1, n_tok);
        for (int j = 0; j < n_tok; ++j) offs.at(j) = offsets[j];
        mask_bcast = t.matmul(t.constant(Tensor::full(N, 1, 1.0)), t.constant(std::move(offs)));
    }

    Var ones_dh = t.constant(Tensor::full(1, d_h, 1.0));
    Var out;
    for (int h = 0; h < n_heads; ++h) {
        Var Qh = t.slice_cols(Qp, h * d_h, (h + 1) * d_h);
        Var logits;
        for (int j = 0; j < n_tok; ++j) {
            Var Kh = t.slice_cols(Kp[j], h * d_h, (h + 1) * d_h);
            Var dot = t.sum_cols(t.mul(Qh, Kh)); // N x 1
            logits = (j == 0) ? dot : t.concat_cols(logits, dot);
        }
        logits = t.scale(logits, 1.0 / std::sqrt(static_cast<double>(d_h)));
        if (masked) logits = t.add(logits, mask_bcast);
        Var A = t.softmax(logits); // N x n_tok

        Var head;
        for (int j = 0; j < n_tok; ++j) {
            Var weight = t.matmul(t.slice_cols(A, j, j + 1), ones_dh); // N x d_h
            Var Vh = t.slice_cols(Vp[j], h * d_h, (h + 1) * d_h);
            Var term = t.mul(weight, Vh);
            head = (j == 0) ? term : t.add(head, term);
        }
        out = (h == 0) ? head : t.concat_cols(out, head);
    }
    return out;
}

Var net_forward(Tape& t, const CrossAttnNet& net, const Tensor& X, const PosteriorBank* post,
                const AttnMask* mask) {
    int N = X.rows();
    Var ones_n = t.constant(Tensor::full(N, 1, 1.0));

    Var phi = bank_features(t, net.bank, X, net.beta_name);

    Var psi = net.cfg.init_mode == InitMode::kFourier ? phi : t.constant(X);
    Var Q = t.tanh(t.add(t.matmul(psi, t.param(net.prefix + "w0")),
                         broadcast_row(t, ones_n, t.param(net.prefix + "b0"))));

    std::vector<Var> tokens = split_tokens(t, phi, net.cfg.d_q);
    std::vector<TokenTag> tags(tokens.size(), TokenTag::kBase);
    if (post != nullptr && post->M_post() > 0) {
        Var pf = posterior_features_on_tape(t, *post, X);
        for (Var tok : split_tokens(t, pf, net.cfg.d_q)) {
            tokens.push_back(tok);
            tags.push_back(TokenTag::kPosterior);
        }
    }
    AttnMask effective = mask != nullptr ? *mask : AttnMask{};
    std::vector<double> offsets = token_offsets(tags, effective);

    for (int l = 0; l < net.cfg.L; ++l) {
        Var ca = cross_attention_batch(t, net, l, Q, tokens, offsets);
        Var Qt = t.add(Q, ca);
        Var ffn = t.tanh(t.add(t.matmul(Qt, t.param(layer_name(net.prefix, l, "wffn"))),
                               broadcast_row(t, ones_n, t.param(layer_name(net.prefix, l, "bffn")))));
        Q = t.add(Qt, ffn);
    }

    return t.add(t.matmul(Q, t.param(net.prefix + "wout")),
                 broadcast_row(t, ones_n, t.param(net.prefix + "bout")));
}

Tensor initial_latent(ParamStore& store, const CrossAttnNet& net, const Tensor& x_row) {
    if (x_row.rows() != 1 || x_row.cols() != net.cfg.d_in) {
        throw ShapeError("initial_latent: expected 1x" + std::to_string(net.cfg.d_in) + ", got " +
                         x_row.shape_str());
    }
    Tape t(&store);
    Var ones = t.constant(Tensor::full(1, 1, 1.0));
    Var psi = net.cfg.init_mode == InitMode::kFourier
                  ? bank_features(t, net.bank, x_row, net.beta_name)
                  : t.constant(x_row);
    Var Q = t.tanh(t.add(t.matmul(psi, t.param(net.prefix + "w0")),
                         t.matmul(ones, t.param(net.prefix + "b0"))));
    return t.val(Q);
}

Tensor cross_attention(ParamStore& store, const CrossAttnNet& net, int layer, const Tensor& q_row,
                       const TokenBank& H, const AttnMask& mask) {
    if (H.n_tokens() == 0) throw ContractError("cross_attention: empty token bank");
    if (H.d_q() != net.cfg.d_q) {
        throw ShapeError("cross_attention: token width " + std::to_string(H.d_q()) + " vs d_q " +
                         std::to_string(net.cfg.d_q));
    }
    Tape t(&store);
    Var Q = t.constant(q_row);
    std::vector<Var> tokens;
    std::vector<TokenTag> tags;
    for (const auto& g : H.groups) {
        for (int j = g.begin; j < g.end; ++j) {
            Tensor row(1, H.d_q());
            for (int c = 0; c < H.d_q(); ++c) row.at(c) = H.tokens(j, c);
            tokens.push_back(t.constant(std::move(row)));
            tags.push_back(g.tag);
        }
    }
    Var out = cross_attention_batch(t, net, layer, Q, tokens, token_offsets(tags, mask));
    return t.val(out);
}

Tensor net_eval(ParamStore& store, const CrossAttnNet& net, const Tensor& X, const PosteriorBank* post,
                const AttnMask* mask) {
    Tape t(&store);
    return t.val(net_forward(t, net, X, post, mask));
}

RffNn init_rff_nn(FrequencyBank bank, int d_out, int width, int depth, ParamStore& store, Rng rng,
                  const std::string& prefix, const std::string& beta_name) {
    if (width < 1 || depth < 1 || d_out < 1) throw ConfigError("init_rff_nn: bad dimensions");
    int in_dim = bank.M();
    for (int l = 0; l < depth; ++l) {
        store.add(layer_name(prefix, l, "w"), glorot(rng, in_dim, width));
        store.add(layer_name(prefix, l, "b"), Tensor(1, width));
        in_dim = width;
    }
    store.add(prefix + "wout", glorot(rng, width, d_out));
    store.add(prefix + "bout", Tensor(1, d_out));

    RffNn net;
    net.bank = std::move(bank);
    net.d_out = d_out;
    net.width = width;
    net.depth = depth;
    net.prefix = prefix;
    net.beta_name = beta_name;
    return net;
}

Var rff_nn_forward(Tape& t, const RffNn& net, const Tensor& X) {
    Var ones_n = t.constant(Tensor::full(X.rows(), 1, 1.0));
    Var h = bank_features(t, net.bank, X, net.beta_name);
    for (int l = 0; l < net.depth; ++l) {
        h = t.tanh(t.add(t.matmul(h, t.param(layer_name(net.prefix, l, "w"))),
                         broadcast_row(t, ones_n, t.param(layer_name(net.prefix, l, "b")))));
    }
    return t.add(t.matmul(h, t.param(net.prefix + "wout")),
                 broadcast_row(t, ones_n, t.param(net.prefix + "bout")));
}

Tensor rff_nn_eval(ParamStore& store, const RffNn& net, const Tensor& X) {
    Tape t(&store);
    return t.val(rff_nn_forward(t, net, X));
}

DenseNet init_dense_net(int d_in, int d_out, int width, int depth, ParamStore& store, Rng rng,
                        const std::string& prefix) {
    if (d_in < 1 || d_out < 1 || width < 1 || depth < 1)
        throw ConfigError("init_dense_net: bad dimensions");
    int in_dim = d_in;
    for (int l = 0; l < depth; ++l) {
        store.add(layer_name(prefix, l, "w"), glorot(rng, in_dim, width));
        store.add(layer_name(prefix, l, "b"), Tensor(1, width));
        in_dim = width;
    }
    store.add(prefix + "wout", glorot(rng, width, d_out));
    store.add(prefix + "bout", Tensor(1, d_out));

    DenseNet net;
    net.d_in = d_in;
    net.d_out = d_out;
    net.width = width;
    net.depth = depth;
    net.prefix = prefix;
    return net;
}

Var dense_net_forward(Tape& t, const DenseNet& net, const Tensor& X) {
    if (X.cols() != net.d_in)
        throw ShapeError("dense_net_forward: input " + X.shape_str() + " does not match d_in " +
                         std::to_string(net.d_in));
    Var ones_n = t.constant(Tensor::full(X.rows(), 1, 1.0));
    Var h = t.constant(X);
    for (int l = 0; l < net.depth; ++l) {
        h = t.tanh(t.add(t.matmul(h, t.param(layer_name(net.prefix, l, "w"))),
                         broadcast_row(t, ones_n, t.param(layer_name(net.prefix, l, "b")))));
    }
    return t.add(t.matmul(h, t.param(net.prefix + "wout")),
                 broadcast_row(t, ones_n, t.param(net.prefix + "bout")));
}

Tensor dense_net_eval(ParamStore& store, const DenseNet& net, const Tensor& X) {
    Tape t(&store);
    return t.val(dense_net_forward(t, net, X));
}

int matched_width(const NetConfig& cfg, int M) {
    int psi_dim = cfg.init_mode == InitMode::kFourier ? M : cfg.d_in;
    double target = static_cast<double>(psi_dim) * cfg.d_q + cfg.d_q +
                    static_cast<double>(cfg.L) * (4.0 * cfg.d_q * cfg.d_q + cfg.d_q) +
                    static_cast<double>(cfg.d_q) * cfg.d_out + cfg.d_out;
    // dense stack with depth L: M*w + w + (L-1)(w^2 + w) + w*d_out + d_out
    double a = cfg.L - 1.0;
    double b = M + cfg.L + cfg.d_out;
    double c = cfg.d_out - target;
    double w;
    if (a <= 0.0) {
        w = -c / b;
    } else {
        w = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    }
    int wi = static_cast<int>(std::ceil(w));
    return wi < 1 ? 1 : wi;
}

size_t param_entry_count(const ParamStore& store, const std::string& prefix) {
    size_t n = 0;
    for (const auto& [name, value] : store.values()) {
        if (name.rfind(prefix, 0) == 0) n += value.size();
    }
    return n;
}

} // namespace sca
