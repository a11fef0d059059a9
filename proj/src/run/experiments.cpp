#include "run/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "bank/feature_bank.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/tape.hpp"
#include "io/checkpoint.hpp"
#include "io/csv.hpp"
#include "io/image.hpp"
#include "net/attention_net.hpp"
#include "opt/optimizer.hpp"
#include "pde/pde.hpp"
#include "spectral/spectral.hpp"
#include "targets/targets.hpp"

namespace sca {
namespace {

namespace fs = std::filesystem;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- plumbing

struct Ctx {
    const ExperimentConfig& cfg;
    fs::path dir;
    Rng master;
    ParamStore store;
    AdamState adam;
    Schedule sched;
    std::vector<std::vector<double>> hist;
    int start_epoch = 0;
    Checkpoint resume;
    bool resuming = false;

    Ctx(const ExperimentConfig& c, fs::path d)
        : cfg(c),
          dir(std::move(d)),
          master(c.seed),
          adam(AdamConfig{.weight_decay = c.weight_decay}),
          sched{c.eta0, c.lr_step, c.lr_gamma} {}

    Rng stream(const std::string& label) const { return master.stream(label); }
    Rng epoch_stream(const char* kind, int epoch) const {
        return master.stream(std::string(kind) + "." + std::to_string(epoch));
    }
};

bool is_int_column(const std::string& experiment, size_t col) {
    if (col == 0) return true;  // epoch / step
    return experiment == "afe" && col == 4;  // stage
}

std::vector<std::string> format_metric_row(const std::string& experiment,
                                           const std::vector<double>& row) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (size_t i = 0; i < row.size(); ++i) {
        if (std::isnan(row[i]))
            cells.push_back("");
        else if (is_int_column(experiment, i))
            cells.push_back(csv_int(static_cast<long long>(std::llround(row[i]))));
        else
            cells.push_back(csv_num(row[i]));
    }
    return cells;
}

void write_metrics(const Ctx& ctx) {
    Csv csv(metric_columns(ctx.cfg.experiment));
    for (const auto& row : ctx.hist) csv.add_row(format_metric_row(ctx.cfg.experiment, row));
    write_text_atomic((ctx.dir / "metrics.csv").string(), csv.text());
}

Checkpoint base_snapshot(const Ctx& ctx, int completed,
                         const std::vector<std::pair<std::string, Tensor>>& extra) {
    Checkpoint st;
    st.config_text = serialize_config(ctx.cfg);
    st.epoch = std::uint64_t(completed);
    st.rng_state = ctx.master.state();
    for (const auto& [name, t] : ctx.store.values()) st.put(name, t);
    for (const auto& [name, t] : ctx.adam.first_moments()) st.put("adam.m." + name, t);
    for (const auto& [name, t] : ctx.adam.second_moments()) st.put("adam.v." + name, t);
    st.put("adam.step", Tensor::scalar(double(ctx.adam.step_count())));
    for (const auto& [name, t] : extra) st.put(name, t);
    if (!ctx.hist.empty()) {
        Tensor h(int(ctx.hist.size()), int(ctx.hist[0].size()));
        for (size_t r = 0; r < ctx.hist.size(); ++r)
            for (size_t c = 0; c < ctx.hist[r].size(); ++c) h(int(r), int(c)) = ctx.hist[r][c];
        st.put("hist.data", h);
    }
    return st;
}

// Restores parameters, optimizer moments, and recorded history from the
// loaded checkpoint. The surrounding recipe has already rebuilt the model
// structure from config+seed, so every store entry must match by name/shape.
void apply_resume(Ctx& ctx, int total_epochs) {
    const Checkpoint& ck = ctx.resume;
    if (ck.config_text != serialize_config(ctx.cfg))
        throw IoError("checkpoint: config does not match the requested run");
    if (ck.epoch > std::uint64_t(total_epochs))
        throw IoError("checkpoint: saved epoch " + std::to_string(ck.epoch) +
                      " is past the configured " + std::to_string(total_epochs));
    for (auto& [name, t] : ctx.store.values()) {
        const Tensor* src = ck.find(name);
        if (!src) throw IoError("checkpoint: missing tensor '" + name + "'");
        if (!src->same_shape(t))
            throw IoError("checkpoint: shape mismatch for '" + name + "' (" + src->shape_str() +
                          " vs " + t.shape_str() + ")");
        t = *src;
    }
    std::map<std::string, Tensor> m, v;
    for (const auto& [name, t] : ck.tensors) {
        if (name.rfind("adam.m.", 0) == 0) m[name.substr(7)] = t;
        else if (name.rfind("adam.v.", 0) == 0) v[name.substr(7)] = t;
    }
    const Tensor* step = ck.find("adam.step");
    if (!step) throw IoError("checkpoint: missing optimizer step counter");
    ctx.adam.restore(std::move(m), std::move(v), long(step->item()));
    size_t cols = metric_columns(ctx.cfg.experiment).size();
    if (const Tensor* h = ck.find("hist.data")) {
        if (h->cols() != int(cols)) throw IoError("checkpoint: history column count mismatch");
        for (int r = 0; r < h->rows(); ++r) {
            std::vector<double> row(cols);
            for (int c = 0; c < h->cols(); ++c) row[c] = (*h)(r, c);
            ctx.hist.push_back(std::move(row));
        }
    }
    ctx.start_epoch = int(ck.epoch);
}

// Setup tensors that are rebuilt deterministically (bank draws, geometry)
// must agree with the checkpoint they claim to continue.
void check_rebuilt(const Ctx& ctx, const std::string& name, const Tensor& fresh) {
    if (!ctx.resuming) return;
    const Tensor* t = ctx.resume.find(name);
    if (!t || !(*t == fresh))
        throw IoError("checkpoint: '" + name + "' does not match this config and seed");
}

using LossFn = std::function<Var(Tape&, int)>;
using RowFn = std::function<std::vector<double>(int, double, double)>;
using SnapFn = std::function<Checkpoint(int)>;

void fit(Ctx& ctx, int total, const LossFn& loss_fn, const RowFn& row_fn, const SnapFn& snap) {
    for (int e = ctx.start_epoch; e < total; ++e) {
        double lr = lr_at(ctx.sched, e);
        Tape tape(&ctx.store);
        Var loss = loss_fn(tape, e);
        double lv = tape.val(loss).item();
        if (!std::isfinite(lv))
            throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(e + 1));
        GradMap grads = tape.backward(loss);
        if (ctx.cfg.clip > 0.0) clip_gradients(grads, ctx.cfg.clip);
        ctx.adam.step(ctx.store, grads, lr);
        int done = e + 1;
        if (done % ctx.cfg.record_every == 0 || done == total)
            ctx.hist.push_back(row_fn(e, lv, lr));
        if (ctx.cfg.checkpoint_every > 0 && done % ctx.cfg.checkpoint_every == 0 && done < total)
            save_checkpoint((ctx.dir / ("checkpoint_" + std::to_string(done) + ".spca")).string(),
                            snap(done));
    }
    save_checkpoint((ctx.dir / "checkpoint_final.spca").string(), snap(total));
}

// ---------------------------------------------------------------- models

struct Model {
    std::string variant;
    CrossAttnNet ca;
    RffNn rff;

    bool attentive() const { return variant != "rff-nn"; }
    const FrequencyBank& bank() const { return attentive() ? ca.bank : rff.bank; }

    Var forward(Tape& t, const Tensor& X, const PosteriorBank* post = nullptr,
                const AttnMask* mask = nullptr) const {
        if (attentive()) return net_forward(t, ca, X, post, mask);
        return rff_nn_forward(t, rff, X);
    }
    Tensor eval(ParamStore& s, const Tensor& X, const PosteriorBank* post = nullptr,
                const AttnMask* mask = nullptr) const {
        if (attentive()) return net_eval(s, ca, X, post, mask);
        return rff_nn_eval(s, rff, X);
    }
};

NetConfig net_config(const ExperimentConfig& cfg, int d_in, int d_out) {
    NetConfig nc;
    nc.d_in = d_in;
    nc.d_out = d_out;
    nc.d_q = cfg.d_q;
    nc.n_heads = cfg.n_heads;
    nc.L = cfg.layers;
    nc.init_mode = cfg.variant == "nn-ca" ? InitMode::kLatent : InitMode::kFourier;
    return nc;
}

Model build_model(Ctx& ctx, int d_in, int d_out) {
    const ExperimentConfig& cfg = ctx.cfg;
    FrequencyBank bank =
        build_bank(d_in, cfg.m_base, cfg.k_scales, cfg.sigma, ctx.stream("bank"), cfg.mean_shift);
    register_bank_params(bank, ctx.store, "bank.beta_raw", cfg.beta0, true);
    Model m;
    m.variant = cfg.variant;
    if (cfg.variant == "rff-nn") {
        int width = cfg.width > 0 ? cfg.width : matched_width(net_config(cfg, d_in, d_out), bank.M());
        m.rff = init_rff_nn(std::move(bank), d_out, width, cfg.layers, ctx.store, ctx.stream("net"),
                            "net.", "bank.beta_raw");
    } else {
        m.ca = init_net(net_config(cfg, d_in, d_out), std::move(bank), ctx.store, ctx.stream("net"),
                        "net.", "bank.beta_raw");
    }
    return m;
}

// Evaluation in row chunks keeps the scratch-tape footprint bounded on
// large test grids.
Tensor eval_rows(const std::function<Tensor(const Tensor&)>& fn, const Tensor& X, int chunk = 2048) {
    if (X.rows() <= chunk) return fn(X);
    std::vector<double> data;
    int cols = -1;
    for (int r0 = 0; r0 < X.rows(); r0 += chunk) {
        int r1 = std::min(X.rows(), r0 + chunk);
        Tensor sub(r1 - r0, X.cols());
        for (int r = r0; r < r1; ++r)
            for (int c = 0; c < X.cols(); ++c) sub(r - r0, c) = X(r, c);
        Tensor y = fn(sub);
        cols = y.cols();
        data.insert(data.end(), y.vec().begin(), y.vec().end());
    }
    return Tensor(X.rows(), cols, std::move(data));
}

std::vector<double> column_of(const Tensor& t, int c) {
    std::vector<double> v(size_t(t.rows()));
    for (int r = 0; r < t.rows(); ++r) v[r] = t(r, c);
    return v;
}

Tensor points_1d(const std::vector<double>& xs) {
    Tensor X(int(xs.size()), 1);
    for (size_t i = 0; i < xs.size(); ++i) X(int(i), 0) = xs[i];
    return X;
}

// n points equispaced on [0, length) with the right endpoint excluded.
std::vector<double> periodic_grid(int n, double length) {
    std::vector<double> xs(size_t(n));
    for (int i = 0; i < n; ++i) xs[i] = length * i / n;
    return xs;
}

// Closed tensor grid over [-1,1]^2 flattened row-major to match
// eval_grid_2d: row r is x2 = g[r], column q is x1 = g[q].
Tensor grid_points_2d(const std::vector<double>& g) {
    int n = int(g.size());
    Tensor X(n * n, 2);
    for (int r = 0; r < n; ++r)
        for (int q = 0; q < n; ++q) {
            X(r * n + q, 0) = g[q];
            X(r * n + q, 1) = g[r];
        }
    return X;
}

MixedConfig mixed_config(const ExperimentConfig& cfg) {
    MixedConfig mc;
    if (cfg.alpha == "fixed") mc.strategy = AlphaStrategy::kFixed;
    else if (cfg.alpha == "learnable") mc.strategy = AlphaStrategy::kLearnable;
    else mc.strategy = AlphaStrategy::kOptimal;
    mc.fixed_value = cfg.alpha_value;
    return mc;
}

// ---------------------------------------------------------------- writers

void write_spectrum(const Ctx& ctx, const std::vector<double>& pred,
                    const std::vector<double>& exact, double length) {
    Spectrum sp = dft_real(pred, length);
    Spectrum se = dft_real(exact, length);
    Csv csv({"k", "mag_pred", "mag_exact"});
    for (size_t k = 0; k < sp.coef.size(); ++k)
        csv.add_row({csv_int(long(k)), csv_num(std::abs(sp.coef[k])), csv_num(std::abs(se.coef[k]))});
    write_text_atomic((ctx.dir / "spectrum.csv").string(), csv.text());
}

void write_prediction_1d(const Ctx& ctx, const std::vector<double>& xs, const Tensor& pred,
                         const std::vector<double>& exact) {
    Csv csv({"x", "pred", "exact"});
    for (size_t i = 0; i < xs.size(); ++i)
        csv.add_row({csv_num(xs[i]), csv_num(pred(int(i), 0)), csv_num(exact[i])});
    write_text_atomic((ctx.dir / "prediction.csv").string(), csv.text());
}

void write_prediction_mixture_1d(const Ctx& ctx, const std::vector<double>& xs, const Tensor& high,
                                 const Tensor& low_scaled, const std::vector<double>& exact) {
    Csv csv({"x", "pred", "exact", "high", "low_scaled"});
    for (size_t i = 0; i < xs.size(); ++i) {
        double h = high(int(i), 0), l = low_scaled(int(i), 0);
        csv.add_row({csv_num(xs[i]), csv_num(h + l), csv_num(exact[i]), csv_num(h), csv_num(l)});
    }
    write_text_atomic((ctx.dir / "prediction.csv").string(), csv.text());
}

void write_manifest(const Ctx& ctx, const std::vector<std::string>& extra_lines) {
    std::ostringstream out;
    out << "experiment: " << ctx.cfg.experiment << "\n";
    out << "seed: " << ctx.cfg.seed << "\n";
    out << "variant: " << ctx.cfg.variant << "\n";
    out << "rng: splitmix64 master seeded by 'seed'; named streams bank, net, low, geom, post,"
           " test; per-epoch streams batch.<e>, colloc.<e>, bdry.<e>\n";
    out << "record_every: " << ctx.cfg.record_every << "\n";
    for (const auto& line : extra_lines) out << line << "\n";
    write_text_atomic((ctx.dir / "manifest.txt").string(), out.str());
}

std::string bank_line(const FrequencyBank& bank) {
    std::ostringstream out;
    out << "bank: m_base=" << bank.M_base() << " k_scales=" << bank.K << " m=" << bank.M()
        << " sigma=" << csv_num(bank.sigma);
    return out.str();
}

// ---------------------------------------------------------------- recipes

RunSummary summarize(const Ctx& ctx, int total) {
    RunSummary s;
    s.out_dir = ctx.dir.string();
    s.columns = metric_columns(ctx.cfg.experiment);
    s.history = ctx.hist;
    s.epochs_completed = total;
    return s;
}

RunSummary run_regress(Ctx& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    const TargetFn& target = target_by_name(cfg.target);
    Model model = build_model(ctx, 2, 1);
    std::vector<std::pair<std::string, Tensor>> extras = {
        {"bank.omega_base", model.bank().omega_base}, {"bank.phases", model.bank().phases}};
    if (ctx.resuming) {
        check_rebuilt(ctx, "bank.omega_base", model.bank().omega_base);
        apply_resume(ctx, cfg.epochs);
    }

    std::vector<double> g = uniform_grid(cfg.grid, -1.0, 1.0);
    Tensor Xg = grid_points_2d(g);
    Tensor exact_grid(cfg.grid * cfg.grid, 1);
    for (int r = 0; r < Xg.rows(); ++r) exact_grid(r, 0) = target.value({Xg(r, 0), Xg(r, 1)});

    int batch = cfg.batch > 0 ? cfg.batch : cfg.grid * cfg.grid;
    auto loss_fn = [&](Tape& t, int e) {
        Rng er = ctx.epoch_stream("batch", e);
        Tensor X(batch, 2), Y(batch, 1);
        for (int i = 0; i < batch; ++i) {
            X(i, 0) = er.uniform(-1.0, 1.0);
            X(i, 1) = er.uniform(-1.0, 1.0);
            Y(i, 0) = target.value({X(i, 0), X(i, 1)});
        }
        Var diff = t.add(model.forward(t, X), t.scale(t.constant(Y), -1.0));
        return t.mean_all(t.square(diff));
    };
    auto eval_grid = [&] {
        return eval_rows([&](const Tensor& X) { return model.eval(ctx.store, X); }, Xg);
    };
    auto row_fn = [&](int e, double loss, double lr) {
        return std::vector<double>{double(e + 1), loss, lr, rel_l2(eval_grid(), exact_grid)};
    };
    SnapFn snap = [&](int done) { return base_snapshot(ctx, done, extras); };
    fit(ctx, cfg.epochs, loss_fn, row_fn, snap);

    Tensor pred = eval_grid();
    Csv csv({"x1", "x2", "pred", "exact"});
    for (int r = 0; r < Xg.rows(); ++r)
        csv.add_row({csv_num(Xg(r, 0)), csv_num(Xg(r, 1)), csv_num(pred(r, 0)),
                     csv_num(exact_grid(r, 0))});
    write_text_atomic((ctx.dir / "prediction.csv").string(), csv.text());

    int mid = cfg.grid / 2;
    std::vector<double> row_pred(size_t(cfg.grid - 1)), row_exact(size_t(cfg.grid - 1));
    for (int q = 0; q + 1 < cfg.grid; ++q) {
        row_pred[q] = pred(mid * cfg.grid + q, 0);
        row_exact[q] = exact_grid(mid * cfg.grid + q, 0);
    }
    write_spectrum(ctx, row_pred, row_exact, 2.0);
    write_manifest(ctx, {bank_line(model.bank()), "target: " + cfg.target,
                         "train: minibatch=" + std::to_string(batch) + " fresh uniform points per epoch",
                         "test: closed " + std::to_string(cfg.grid) + "x" + std::to_string(cfg.grid) +
                             " grid on [-1,1]^2",
                         "epochs: " + std::to_string(cfg.epochs)});
    write_metrics(ctx);
    return summarize(ctx, cfg.epochs);
}

RunSummary run_image(Ctx& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    if (cfg.image.empty()) throw ConfigError("image experiment requires the 'image' key (a PPM path)");
    ImageGrid full = load_ppm(cfg.image);
    ImageGrid img = downsample(full, cfg.downsample);
    long pixels = long(img.height) * img.width;
    if (pixels > cfg.pixel_budget)
        throw ConfigError("image: " + std::to_string(pixels) + " pixels after downsampling exceeds pixel_budget " +
                          std::to_string(cfg.pixel_budget));

    int n = int(pixels);
    Tensor X(n, 2), Y(n, 3);
    for (int i = 0; i < img.height; ++i)
        for (int j = 0; j < img.width; ++j) {
            int r = i * img.width + j;
            X(r, 0) = pixel_center_x(j, img.width);
            X(r, 1) = pixel_center_y(i, img.height);
            for (int c = 0; c < 3; ++c) Y(r, c) = img.at(i, j, c);
        }

    Model model = build_model(ctx, 2, 3);
    std::vector<std::pair<std::string, Tensor>> extras = {
        {"bank.omega_base", model.bank().omega_base}, {"bank.phases", model.bank().phases}};
    if (ctx.resuming) {
        check_rebuilt(ctx, "bank.omega_base", model.bank().omega_base);
        apply_resume(ctx, cfg.epochs);
    }

    auto loss_fn = [&](Tape& t, int e) {
        if (cfg.batch <= 0 || cfg.batch >= n) {
            Var diff = t.add(model.forward(t, X), t.scale(t.constant(Y), -1.0));
            return t.mean_all(t.square(diff));
        }
        Rng er = ctx.epoch_stream("batch", e);
        Tensor Xb(cfg.batch, 2), Yb(cfg.batch, 3);
        for (int i = 0; i < cfg.batch; ++i) {
            int r = int(er.uniform() * n);
            for (int c = 0; c < 2; ++c) Xb(i, c) = X(r, c);
            for (int c = 0; c < 3; ++c) Yb(i, c) = Y(r, c);
        }
        Var diff = t.add(model.forward(t, Xb), t.scale(t.constant(Yb), -1.0));
        return t.mean_all(t.square(diff));
    };
    auto predict = [&] {
        return eval_rows([&](const Tensor& x) { return model.eval(ctx.store, x); }, X);
    };
    auto channels = [&](const Tensor& flat) {
        std::vector<Tensor> chans;
        for (int c = 0; c < 3; ++c) {
            Tensor t(img.height, img.width);
            for (int i = 0; i < img.height; ++i)
                for (int j = 0; j < img.width; ++j) t(i, j) = flat(i * img.width + j, c);
            chans.push_back(std::move(t));
        }
        return chans;
    };
    std::vector<Tensor> truth_chans = channels(Y);
    auto row_fn = [&](int e, double loss, double lr) {
        Tensor pred = predict();
        return std::vector<double>{double(e + 1), loss,
                                   lr,            rel_l2(pred, Y),
                                   psnr(pred, Y), hfen(channels(pred), truth_chans)};
    };
    SnapFn snap = [&](int done) { return base_snapshot(ctx, done, extras); };
    fit(ctx, cfg.epochs, loss_fn, row_fn, snap);

    Tensor pred = predict();
    Csv csv({"i", "j", "pred_r", "pred_g", "pred_b", "true_r", "true_g", "true_b"});
    for (int i = 0; i < img.height; ++i)
        for (int j = 0; j < img.width; ++j) {
            int r = i * img.width + j;
            csv.add_row({csv_int(i), csv_int(j), csv_num(pred(r, 0)), csv_num(pred(r, 1)),
                         csv_num(pred(r, 2)), csv_num(Y(r, 0)), csv_num(Y(r, 1)), csv_num(Y(r, 2))});
        }
    write_text_atomic((ctx.dir / "prediction.csv").string(), csv.text());

    int mid = img.height / 2;
    std::vector<double> row_pred(size_t(img.width)), row_exact(size_t(img.width));
    for (int j = 0; j < img.width; ++j) {
        int r = mid * img.width + j;
        row_pred[j] = (pred(r, 0) + pred(r, 1) + pred(r, 2)) / 3.0;
        row_exact[j] = (Y(r, 0) + Y(r, 1) + Y(r, 2)) / 3.0;
    }
    write_spectrum(ctx, row_pred, row_exact, 2.0);
    write_manifest(ctx, {bank_line(model.bank()), "image: " + cfg.image,
                         "grid: " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                             " downsampled by " + std::to_string(cfg.downsample) + " from " +
                             std::to_string(full.height) + "x" + std::to_string(full.width),
                         "epochs: " + std::to_string(cfg.epochs)});
    write_metrics(ctx);
    return summarize(ctx, cfg.epochs);
}

RunSummary run_afe(Ctx& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    int total = cfg.e1 + cfg.e2;
    Model model = build_model(ctx, 1, 1);

    std::vector<double> train_xs = periodic_grid(cfg.n_train, 1.0);
    Tensor Xtr = points_1d(train_xs);
    Tensor Ytr(cfg.n_train, 1);
    for (int i = 0; i < cfg.n_train; ++i) Ytr(i, 0) = afe_target(train_xs[i]);
    std::vector<double> test_xs = periodic_grid(cfg.n_test, 1.0);
    Tensor Xte = points_1d(test_xs);
    std::vector<double> test_exact(test_xs.size());
    for (size_t i = 0; i < test_xs.size(); ++i) test_exact[i] = afe_target(test_xs[i]);
    std::vector<double> fft_xs = periodic_grid(cfg.n_fft, 1.0);
    Tensor Xfft = points_1d(fft_xs);
    std::vector<double> fft_exact(fft_xs.size());
    for (size_t i = 0; i < fft_xs.size(); ++i) fft_exact[i] = afe_target(fft_xs[i]);

    bool post_built = false;
    PosteriorBank post;
    AfeSchedule mask_sched{cfg.eta_start, cfg.hold_frac, std::max(cfg.e2, 1)};

    std::vector<std::pair<std::string, Tensor>> extras = {
        {"bank.omega_base", model.bank().omega_base},
        {"bank.phases", model.bank().phases},
        {"afe.post_built", Tensor::scalar(0.0)}};
    auto refresh_extras = [&] {
        extras.resize(2);
        extras.emplace_back("afe.post_built", Tensor::scalar(post_built ? 1.0 : 0.0));
        if (post_built && post.M_post() > 0) {
            Tensor ks(1, post.M_post());
            for (int i = 0; i < post.M_post(); ++i) ks(0, i) = double(post.k_post[i]);
            extras.emplace_back("afe.k_post", ks);
            extras.emplace_back("afe.post_phases", post.phases);
        }
    };
    if (ctx.resuming) {
        check_rebuilt(ctx, "bank.omega_base", model.bank().omega_base);
        apply_resume(ctx, total);
        const Tensor* built = ctx.resume.find("afe.post_built");
        if (!built) throw IoError("checkpoint: missing enhancement stage flag");
        if (built->item() != 0.0) {
            post_built = true;
            if (const Tensor* ks = ctx.resume.find("afe.k_post")) {
                const Tensor* ph = ctx.resume.find("afe.post_phases");
                if (!ph) throw IoError("checkpoint: posterior phases missing");
                for (int i = 0; i < ks->cols(); ++i)
                    post.k_post.push_back(int(std::llround((*ks)(0, i))));
                post.phases = *ph;
            }
            refresh_extras();
        }
    }

    auto active_post = [&](int e) -> const PosteriorBank* {
        return (e >= cfg.e1 && post_built && post.M_post() > 0) ? &post : nullptr;
    };
    auto mask_at = [&](int e) {
        AttnMask m;
        m.posterior_eta = e >= cfg.e1 ? afe_eta(mask_sched, e - cfg.e1) : 0.0;
        return m;
    };
    auto ensure_posterior = [&](int e) {
        if (e < cfg.e1 || post_built) return;
        Tensor pred = eval_rows([&](const Tensor& x) { return model.eval(ctx.store, x); }, Xfft);
        std::vector<double> residual(fft_exact.size());
        for (size_t i = 0; i < residual.size(); ++i) residual[i] = pred(int(i), 0) - fft_exact[i];
        std::vector<int> modes = dominant_modes(dft_real(residual, 1.0), cfg.lambda);
        post = build_posterior_bank(modes, ctx.stream("post"));
        post_built = true;
        refresh_extras();
    };

    int batch = cfg.batch > 0 && cfg.batch < cfg.n_train ? cfg.batch : 0;
    auto loss_fn = [&](Tape& t, int e) {
        ensure_posterior(e);
        AttnMask mask = mask_at(e);
        const PosteriorBank* pb = active_post(e);
        Tensor Xb = Xtr, Yb = Ytr;
        if (batch > 0) {
            Xb = Tensor(batch, 1);
            Yb = Tensor(batch, 1);
            Rng er = ctx.epoch_stream("batch", e);
            for (int i = 0; i < batch; ++i) {
                int r = int(er.uniform() * cfg.n_train);
                Xb(i, 0) = Xtr(r, 0);
                Yb(i, 0) = Ytr(r, 0);
            }
        }
        Var diff = t.add(model.forward(t, Xb, pb, &mask), t.scale(t.constant(Yb), -1.0));
        return t.mean_all(t.square(diff));
    };
    auto predict_on = [&](const Tensor& Xs, int e) {
        AttnMask mask = mask_at(e);
        const PosteriorBank* pb = active_post(e);
        return eval_rows([&](const Tensor& x) { return model.eval(ctx.store, x, pb, &mask); }, Xs);
    };
    auto row_fn = [&](int e, double loss, double lr) {
        Tensor pred = predict_on(Xte, e);
        double rl2 = rel_l2(column_of(pred, 0), test_exact);
        double stage = e < cfg.e1 ? 1.0 : 2.0;
        double eta = e < cfg.e1 ? kNan : afe_eta(mask_sched, e - cfg.e1);
        return std::vector<double>{double(e + 1), loss, lr, rl2, stage, eta};
    };
    SnapFn snap = [&](int done) { return base_snapshot(ctx, done, extras); };
    fit(ctx, total, loss_fn, row_fn, snap);

    int last = total > 0 ? total - 1 : 0;
    Tensor pred_te = predict_on(Xte, last);
    write_prediction_1d(ctx, test_xs, pred_te, test_exact);
    Tensor pred_fft = predict_on(Xfft, last);
    write_spectrum(ctx, column_of(pred_fft, 0), fft_exact, 1.0);

    std::ostringstream kline;
    kline << "k_post:";
    for (int k : post.k_post) kline << " " << k;
    write_manifest(ctx,
                   {bank_line(model.bank()),
                    "stages: e1=" + std::to_string(cfg.e1) + " e2=" + std::to_string(cfg.e2),
                    "threshold: lambda=" + csv_num(cfg.lambda) + " on n_fft=" + std::to_string(cfg.n_fft),
                    kline.str(),
                    "mask: eta_start=" + csv_num(cfg.eta_start) + " hold_frac=" + csv_num(cfg.hold_frac)});
    write_metrics(ctx);
    RunSummary s = summarize(ctx, total);
    s.k_post = post.k_post;
    return s;
}

RunSummary run_heatmap(Ctx& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    Model model = build_model(ctx, 1, 1);
    std::vector<std::pair<std::string, Tensor>> extras = {
        {"bank.omega_base", model.bank().omega_base}, {"bank.phases", model.bank().phases}};
    if (ctx.resuming) {
        check_rebuilt(ctx, "bank.omega_base", model.bank().omega_base);
        apply_resume(ctx, cfg.epochs);
    }

    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>& x) { return heatmap_source(x[0]); };
    prob.gamma = cfg.gamma;
    prob.n_r = cfg.n_r;
    prob.n_b = cfg.n_b;
    prob.fd_step = cfg.fd_step;
    BatchFn u = [&](Tape& t, const Tensor& X) { return model.forward(t, X); };

    auto loss_fn = [&](Tape& t, int e) {
        Rng er = ctx.epoch_stream("colloc", e);
        Tensor Xr = sample_interior(prob.domain, cfg.n_r, er);
        if (cfg.objective == "regression") {
            Tensor Y(Xr.rows(), 1);
            for (int i = 0; i < Xr.rows(); ++i) Y(i, 0) = heatmap_target(Xr(i, 0));
            Var diff = t.add(model.forward(t, Xr), t.scale(t.constant(Y), -1.0));
            return t.mean_all(t.square(diff));
        }
        Rng eb = ctx.epoch_stream("bdry", e);
        Tensor Xb = sample_boundary(prob.domain, cfg.n_b, eb);
        if (cfg.objective == "ritz") return ritz_loss(t, prob, u, Xr, Xb).loss;
        return pinn_loss(t, prob, u, Xr, Xb);
    };

    std::vector<double> g = uniform_grid(cfg.grid, -1.0, 1.0);
    Tensor Xg = points_1d(g);
    std::vector<double> exact(g.size());
    for (size_t i = 0; i < g.size(); ++i) exact[i] = heatmap_target(g[i]);
    const std::vector<int> modes = {1, 5, 20};
    std::vector<double> truth_coef = mode_projection(exact, modes);
    auto row_fn = [&](int e, double loss, double lr) {
        Tensor pred = eval_rows([&](const Tensor& x) { return model.eval(ctx.store, x); }, Xg);
        std::vector<double> pv = column_of(pred, 0);
        std::vector<double> coef = mode_projection(pv, modes);
        std::vector<double> row{double(e + 1), loss, lr, rel_l2(pv, exact)};
        for (size_t i = 0; i < modes.size(); ++i)
            row.push_back(std::abs(coef[i] - truth_coef[i]) / std::abs(truth_coef[i]));
        return row;
    };
    SnapFn snap = [&](int done) { return base_snapshot(ctx, done, extras); };
    fit(ctx, cfg.epochs, loss_fn, row_fn, snap);

    Tensor pred = eval_rows([&](const Tensor& x) { return model.eval(ctx.store, x); }, Xg);
    write_prediction_1d(ctx, g, pred, exact);
    std::vector<double> pv = column_of(pred, 0);
    pv.pop_back();
    std::vector<double> ev = exact;
    ev.pop_back();
    write_spectrum(ctx, pv, ev, 2.0);
    write_manifest(ctx, {bank_line(model.bank()), "objective: " + cfg.objective,
                         "modes_tracked: 1 5 20", "epochs: " + std::to_string(cfg.epochs)});
    write_metrics(ctx);
    return summarize(ctx, cfg.epochs);
}

// Shared mixture-of-two-networks trainer behind the three PDE recipes.
struct MixtureSetup {
    PdeProblem prob;
    std::function<double(const std::vector<double>&)> exact;
    Tensor Xtest;                 // fixed evaluation points
    std::vector<double> test_exact;
    std::vector<std::string> manifest;
    std::vector<std::pair<std::string, Tensor>> extras;
    std::vector<double> line_xs;  // 1D slice for prediction/spectrum artifacts
    Tensor Xline;
    std::vector<double> line_exact;
    double spectrum_length = 2.0;
};

RunSummary run_mixture(Ctx& ctx, MixtureSetup&& setup, int d_in) {
    const ExperimentConfig& cfg = ctx.cfg;
    MixedConfig mix = mixed_config(cfg);
    Model high = build_model(ctx, d_in, 1);
    DenseNet low = init_dense_net(d_in, 1, cfg.low_width, cfg.low_depth, ctx.store,
                                  ctx.stream("low"), "low.");
    if (mix.strategy == AlphaStrategy::kLearnable)
        register_alpha_param(ctx.store, mix, cfg.alpha_value);
    setup.extras.emplace_back("bank.omega_base", high.bank().omega_base);
    setup.extras.emplace_back("bank.phases", high.bank().phases);
    if (ctx.resuming) {
        check_rebuilt(ctx, "bank.omega_base", high.bank().omega_base);
        apply_resume(ctx, cfg.epochs);
    }

    BatchFn u_h = [&](Tape& t, const Tensor& X) { return high.forward(t, X); };
    BatchFn u_l = [&](Tape& t, const Tensor& X) { return dense_net_forward(t, low, X); };

    if (cfg.objective == "ritz" && mix.strategy == AlphaStrategy::kOptimal)
        throw ConfigError("optimal alpha requires the pinn objective");

    double last_alpha = mix.strategy == AlphaStrategy::kFixed ? mix.fixed_value : cfg.alpha_value;
    auto current_alpha = [&]() -> double {
        switch (mix.strategy) {
            case AlphaStrategy::kFixed: return mix.fixed_value;
            case AlphaStrategy::kLearnable: return ctx.store.get(mix.alpha_param).item();
            case AlphaStrategy::kOptimal: return last_alpha;
        }
        return 0.0;
    };

    // Composite prediction for the ritz path; mixed_pinn_loss covers pinn.
    BatchFn u_mix = [&](Tape& t, const Tensor& X) {
        Var h = u_h(t, X);
        Var l = u_l(t, X);
        if (mix.strategy == AlphaStrategy::kFixed) return t.add(h, t.scale(l, mix.fixed_value));
        Var ones = t.constant(Tensor::full(X.rows(), 1, 1.0));
        Var a = t.matmul(ones, t.param(mix.alpha_param));
        return t.add(h, t.mul(l, a));
    };

    auto loss_fn = [&](Tape& t, int e) {
        Rng er = ctx.epoch_stream("colloc", e);
        Tensor Xr = sample_interior(setup.prob.domain, cfg.n_r, er);
        Rng eb = ctx.epoch_stream("bdry", e);
        Tensor Xb = sample_boundary(setup.prob.domain, cfg.n_b, eb);
        if (cfg.objective == "ritz") return ritz_loss(t, setup.prob, u_mix, Xr, Xb).loss;
        MixedLoss ml = mixed_pinn_loss(t, setup.prob, u_h, u_l, mix, Xr, Xb);
        last_alpha = ml.alpha;
        return ml.loss;
    };
    auto predict_on = [&](const Tensor& X) {
        double a = current_alpha();
        return eval_rows(
            [&](const Tensor& x) { return mixed_eval(ctx.store, u_h, u_l, a, x); }, X);
    };
    auto row_fn = [&](int e, double loss, double lr) {
        Tensor pred = predict_on(setup.Xtest);
        return std::vector<double>{double(e + 1), loss, lr,
                                   rel_l2(column_of(pred, 0), setup.test_exact), current_alpha()};
    };
    SnapFn snap = [&](int done) { return base_snapshot(ctx, done, setup.extras); };
    fit(ctx, cfg.epochs, loss_fn, row_fn, snap);

    double a = current_alpha();
    Tensor high_line = eval_rows([&](const Tensor& x) { return high.eval(ctx.store, x); }, setup.Xline);
    Tensor low_line =
        eval_rows([&](const Tensor& x) { return dense_net_eval(ctx.store, low, x); }, setup.Xline);
    for (size_t i = 0; i < low_line.size(); ++i) low_line.at(i) *= a;
    write_prediction_mixture_1d(ctx, setup.line_xs, high_line, low_line, setup.line_exact);
    std::vector<double> line_pred(setup.line_xs.size());
    for (size_t i = 0; i < line_pred.size(); ++i) line_pred[i] = high_line(int(i), 0) + low_line.at(i);
    line_pred.pop_back();
    std::vector<double> line_ex = setup.line_exact;
    line_ex.pop_back();
    write_spectrum(ctx, line_pred, line_ex, setup.spectrum_length);

    std::vector<std::string> lines = setup.manifest;
    lines.insert(lines.begin(), bank_line(high.bank()));
    lines.push_back("alpha: strategy=" + cfg.alpha + " final=" + csv_num(a));
    lines.push_back("low_net: width=" + std::to_string(cfg.low_width) +
                    " depth=" + std::to_string(cfg.low_depth));
    lines.push_back("epochs: " + std::to_string(cfg.epochs));
    write_manifest(ctx, lines);
    write_metrics(ctx);
    return summarize(ctx, cfg.epochs);
}

RunSummary run_poisson1d(Ctx& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    double nu = cfg.nu;
    MixtureSetup s;
    s.prob.domain = {DomainKind::kBox, 1};
    s.prob.source = [nu](const std::vector<double>& x) { return poisson1d_source(x[0], nu); };
    s.prob.boundary_data = [nu](const std::vector<double>& x) { return poisson1d_exact(x[0], nu); };
    s.prob.gamma = cfg.gamma;
    s.prob.n_r = cfg.n_r;
    s.prob.n_b = cfg.n_b;
    s.prob.fd_step = cfg.fd_step;
    s.line_xs = uniform_grid(cfg.grid, -1.0, 1.0);
    s.Xline = points_1d(s.line_xs);
    s.line_exact.resize(s.line_xs.size());
    for (size_t i = 0; i < s.line_xs.size(); ++i) s.line_exact[i] = poisson1d_exact(s.line_xs[i], nu);
    s.Xtest = s.Xline;
    s.test_exact = s.line_exact;
    s.manifest = {"pde: -u'' = f on [-1,1], five-mode solution, nu=" + csv_num(nu),
                  "objective: " + cfg.objective};
    return run_mixture(ctx, std::move(s), 1);
}

RunSummary run_poisson2d(Ctx& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    double mu = cfg.mu;
    MixtureSetup s;
    s.prob.domain = {DomainKind::kBox, 2};
    s.prob.source = [mu](const std::vector<double>& x) { return poisson2d_source(x[0], x[1], mu); };
    s.prob.boundary_data = [mu](const std::vector<double>& x) {
        return poisson2d_exact(x[0], x[1], mu);
    };
    s.prob.gamma = cfg.gamma;
    s.prob.n_r = cfg.n_r;
    s.prob.n_b = cfg.n_b;
    s.prob.fd_step = cfg.fd_step;
    std::vector<double> g = uniform_grid(cfg.grid, -1.0, 1.0);
    s.Xtest = grid_points_2d(g);
    s.test_exact.resize(size_t(cfg.grid) * cfg.grid);
    for (int r = 0; r < s.Xtest.rows(); ++r)
        s.test_exact[r] = poisson2d_exact(s.Xtest(r, 0), s.Xtest(r, 1), mu);
    // 1D artifact slice: x2 fixed at the grid midpoint
    double x2 = g[size_t(cfg.grid / 2)];
    s.line_xs = g;
    s.Xline = Tensor(cfg.grid, 2);
    s.line_exact.resize(g.size());
    for (int i = 0; i < cfg.grid; ++i) {
        s.Xline(i, 0) = g[i];
        s.Xline(i, 1) = x2;
        s.line_exact[i] = poisson2d_exact(g[i], x2, mu);
    }
    s.manifest = {"pde: -lap u = f on [-1,1]^2, mu=" + csv_num(mu),
                  "objective: " + cfg.objective,
                  "slice: x2=" + csv_num(x2)};
    return run_mixture(ctx, std::move(s), 2);
}

RunSummary run_pb3d(Ctx& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    double mu = cfg.mu;
    BallUnionDomain geom = build_pb_domain(ctx.stream("geom").state());
    MixtureSetup s;
    s.prob.domain = {DomainKind::kBall, 3};
    auto kappa = [geom](const std::vector<double>& x) {
        return in_omega1(geom, {x[0], x[1], x[2]}) ? 1.0 : 5.0;
    };
    s.prob.kappa = kappa;
    s.prob.source = [mu, kappa](const std::vector<double>& x) {
        return pb_source({x[0], x[1], x[2]}, mu, kappa(x));
    };
    s.prob.gamma = cfg.gamma;
    s.prob.n_r = cfg.n_r;
    s.prob.n_b = cfg.n_b;
    s.prob.fd_step = cfg.fd_step;
    Rng tr = ctx.stream("test");
    s.Xtest = sample_interior(s.prob.domain, cfg.n_test, tr);
    s.test_exact.resize(size_t(cfg.n_test));
    for (int r = 0; r < s.Xtest.rows(); ++r)
        s.test_exact[r] = pb_exact({s.Xtest(r, 0), s.Xtest(r, 1), s.Xtest(r, 2)}, mu);
    s.line_xs = uniform_grid(cfg.grid, -1.0, 1.0);
    s.Xline = Tensor(cfg.grid, 3);
    s.line_exact.resize(s.line_xs.size());
    for (int i = 0; i < cfg.grid; ++i) {
        s.Xline(i, 0) = s.line_xs[i];
        s.Xline(i, 1) = 0.0;
        s.Xline(i, 2) = 0.0;
        s.line_exact[i] = pb_exact({s.line_xs[i], 0.0, 0.0}, mu);
    }
    s.extras.emplace_back("geom.centers", geom.centers);
    s.extras.emplace_back("geom.radii", geom.radii);
    s.manifest = {"pde: -lap u + kappa u = f on the unit ball, mu=" + csv_num(mu),
                  "objective: " + cfg.objective,
                  "kappa: 1 inside the ball union, 5 outside",
                  "test: " + std::to_string(cfg.n_test) + " fixed interior points",
                  "slice: x1 axis"};
    for (int i = 0; i < geom.centers.rows(); ++i) {
        std::ostringstream line;
        line << "ball " << i << ": " << csv_num(geom.centers(i, 0)) << " "
             << csv_num(geom.centers(i, 1)) << " " << csv_num(geom.centers(i, 2)) << " r="
             << csv_num(geom.radii(0, i));
        s.manifest.push_back(line.str());
    }
    RunSummary out = run_mixture(ctx, std::move(s), 3);
    return out;
}

RunSummary run_appendix(Ctx& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    if (ctx.resuming) throw ConfigError("appendix runs recompute from closed forms; resume is meaningless");
    ModeTrajectories traj =
        toy_mode_dynamics(cfg.k_mode, cfg.c_target, cfg.order, cfg.toy_eta, cfg.toy_steps);
    for (int s = 0; s <= cfg.toy_steps; ++s) {
        if (s % ctx.cfg.record_every == 0 || s == cfg.toy_steps)
            ctx.hist.push_back({double(s), traj.c1[size_t(s)], traj.c2[size_t(s)],
                                traj.c1_closed[size_t(s)], traj.c2_closed[size_t(s)]});
    }
    double c1 = traj.c1.back(), c2 = traj.c2.back();

    std::vector<std::pair<std::string, Tensor>> extras = {{"toy.c1", Tensor::scalar(c1)},
                                                          {"toy.c2", Tensor::scalar(c2)}};
    save_checkpoint((ctx.dir / "checkpoint_final.spca").string(),
                    base_snapshot(ctx, cfg.toy_steps, extras));

    const double pi = std::numbers::pi;
    std::vector<double> g = uniform_grid(cfg.grid, -1.0, 1.0);
    Csv pcsv({"x", "pred", "exact"});
    for (double x : g) {
        double pred = c1 * std::sin(pi * x) + c2 * std::sin(cfg.k_mode * pi * x);
        double exact = std::sin(pi * x) + cfg.c_target * std::sin(cfg.k_mode * pi * x);
        pcsv.add_row({csv_num(x), csv_num(pred), csv_num(exact)});
    }
    write_text_atomic((ctx.dir / "prediction.csv").string(), pcsv.text());

    double w1 = std::pow(pi, 2.0 * cfg.order);
    double wk = std::pow(cfg.k_mode * pi, 2.0 * cfg.order);
    Csv scsv({"mode", "curvature_weight", "coef_final", "coef_target"});
    scsv.add_row({csv_int(1), csv_num(w1), csv_num(c1), csv_num(1.0)});
    scsv.add_row({csv_int(cfg.k_mode), csv_num(wk), csv_num(c2), csv_num(cfg.c_target)});
    write_text_atomic((ctx.dir / "spectrum.csv").string(), scsv.text());

    write_manifest(ctx, {"model: two-mode quadratic frequency-learning dynamics",
                         "k=" + std::to_string(cfg.k_mode) + " c=" + csv_num(cfg.c_target) +
                             " order=" + std::to_string(cfg.order),
                         "initial_gradient_ratio: " +
                             csv_num(gradient_ratio(cfg.k_mode, cfg.c_target, cfg.order)),
                         "eta=" + csv_num(cfg.toy_eta) + " steps=" + std::to_string(cfg.toy_steps)});
    write_metrics(ctx);
    return summarize(ctx, cfg.toy_steps);
}

}  // namespace

double RunSummary::final_value(const std::string& column) const {
    if (history.empty()) throw ContractError("run has no recorded history");
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == column) return history.back()[i];
    throw ContractError("no metric column named '" + column + "'");
}

std::vector<std::string> metric_columns(const std::string& experiment) {
    if (experiment == "regress") return {"epoch", "loss", "lr", "rel_l2"};
    if (experiment == "image") return {"epoch", "loss", "lr", "rel_l2", "psnr", "hfen"};
    if (experiment == "heatmap") return {"epoch", "loss", "lr", "rel_l2", "df1", "df5", "df20"};
    if (experiment == "afe") return {"epoch", "loss", "lr", "rel_l2", "stage", "eta"};
    if (experiment == "poisson1d" || experiment == "poisson2d" || experiment == "pb3d")
        return {"epoch", "loss", "lr", "rel_l2", "alpha"};
    if (experiment == "appendix") return {"step", "c1", "c2", "c1_closed", "c2_closed"};
    throw ConfigError("config: unknown experiment '" + experiment + "'");
}

std::string resolve_out_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
    fs::path base;
    if (!opts.out_root.empty()) {
        base = opts.out_root;
    } else if (const char* env = std::getenv("SPECTRA_CA_OUT"); env && *env) {
        base = env;
    } else {
        base = ".";
    }
    fs::path leaf = cfg.out_dir.empty()
                        ? fs::path("runs") / (cfg.experiment + "-seed" + std::to_string(cfg.seed))
                        : fs::path(cfg.out_dir);
    return (leaf.is_absolute() ? leaf : base / leaf).string();
}

RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    fs::path dir = resolve_out_dir(cfg, opts);
    bool resuming = !opts.resume_from.empty();
    if (!resuming && !opts.force && fs::exists(dir) && !fs::is_empty(dir))
        throw IoError("run directory '" + dir.string() + "' already has artifacts (use force to overwrite)");
    fs::create_directories(dir);

    Ctx ctx(cfg, dir);
    if (resuming) {
        ctx.resume = load_checkpoint(opts.resume_from);
        ctx.resuming = true;
    }
    write_text_atomic((dir / "config.ini").string(), serialize_config(cfg));

    if (cfg.experiment == "regress") return run_regress(ctx);
    if (cfg.experiment == "image") return run_image(ctx);
    if (cfg.experiment == "afe") return run_afe(ctx);
    if (cfg.experiment == "heatmap") return run_heatmap(ctx);
    if (cfg.experiment == "poisson1d") return run_poisson1d(ctx);
    if (cfg.experiment == "poisson2d") return run_poisson2d(ctx);
    if (cfg.experiment == "pb3d") return run_pb3d(ctx);
    if (cfg.experiment == "appendix") return run_appendix(ctx);
    throw ConfigError("config: unknown experiment '" + cfg.experiment + "'");
}

}  // namespace sca
