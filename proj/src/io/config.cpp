#include "io/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "core/errors.hpp"

namespace sca {
namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

long long to_int(const std::string& v, int line) {
    if (v.empty()) fail(line, "empty integer value");
    char* end = nullptr;
    errno = 0;
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (errno != 0 || end != v.c_str() + v.size()) fail(line, "bad integer '" + v + "'");
    return x;
}

double to_double(const std::string& v, int line) {
    if (v.empty()) fail(line, "empty numeric value");
    char* end = nullptr;
    errno = 0;
    double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size()) fail(line, "bad number '" + v + "'");
    return x;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Field {
    const char* key;
    std::function<void(ExperimentConfig&, const std::string&, int)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

Field int_field(const char* key, int ExperimentConfig::* m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& v, int line) {
                long long x = to_int(v, line);
                if (x < -2000000000LL || x > 2000000000LL) fail(line, "integer out of range");
                c.*m = static_cast<int>(x);
            },
            [m](const ExperimentConfig& c) { return std::to_string(c.*m); }};
}

Field long_field(const char* key, long ExperimentConfig::* m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& v, int line) { c.*m = static_cast<long>(to_int(v, line)); },
            [m](const ExperimentConfig& c) { return std::to_string(c.*m); }};
}

Field u64_field(const char* key, std::uint64_t ExperimentConfig::* m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& v, int line) {
                if (v.empty() || v[0] == '-') fail(line, "bad unsigned value '" + v + "'");
                char* end = nullptr;
                errno = 0;
                unsigned long long x = std::strtoull(v.c_str(), &end, 10);
                if (errno != 0 || end != v.c_str() + v.size()) fail(line, "bad unsigned value '" + v + "'");
                c.*m = x;
            },
            [m](const ExperimentConfig& c) { return std::to_string(c.*m); }};
}

Field dbl_field(const char* key, double ExperimentConfig::* m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& v, int line) { c.*m = to_double(v, line); },
            [m](const ExperimentConfig& c) { return fmt_double(c.*m); }};
}

Field str_field(const char* key, std::string ExperimentConfig::* m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& v, int) { c.*m = v; },
            [m](const ExperimentConfig& c) { return c.*m; }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        u64_field("seed", &ExperimentConfig::seed),
        str_field("variant", &ExperimentConfig::variant),
        int_field("m_base", &ExperimentConfig::m_base),
        int_field("k_scales", &ExperimentConfig::k_scales),
        dbl_field("sigma", &ExperimentConfig::sigma),
        dbl_field("beta0", &ExperimentConfig::beta0),
        {"mean_shift",
         [](ExperimentConfig& c, const std::string& v, int line) {
             c.mean_shift.clear();
             if (trim(v).empty()) return;
             std::stringstream ss(v);
             std::string part;
             while (std::getline(ss, part, ',')) c.mean_shift.push_back(to_double(trim(part), line));
         },
         [](const ExperimentConfig& c) {
             std::string out;
             for (size_t i = 0; i < c.mean_shift.size(); ++i) {
                 if (i) out += ",";
                 out += fmt_double(c.mean_shift[i]);
             }
             return out;
         }},
        int_field("d_q", &ExperimentConfig::d_q),
        int_field("n_heads", &ExperimentConfig::n_heads),
        int_field("layers", &ExperimentConfig::layers),
        int_field("width", &ExperimentConfig::width),
        int_field("low_width", &ExperimentConfig::low_width),
        int_field("low_depth", &ExperimentConfig::low_depth),
        int_field("epochs", &ExperimentConfig::epochs),
        int_field("batch", &ExperimentConfig::batch),
        dbl_field("eta0", &ExperimentConfig::eta0),
        int_field("lr_step", &ExperimentConfig::lr_step),
        dbl_field("lr_gamma", &ExperimentConfig::lr_gamma),
        dbl_field("clip", &ExperimentConfig::clip),
        dbl_field("weight_decay", &ExperimentConfig::weight_decay),
        dbl_field("gamma", &ExperimentConfig::gamma),
        int_field("n_r", &ExperimentConfig::n_r),
        int_field("n_b", &ExperimentConfig::n_b),
        dbl_field("fd_step", &ExperimentConfig::fd_step),
        str_field("alpha", &ExperimentConfig::alpha),
        dbl_field("alpha_value", &ExperimentConfig::alpha_value),
        dbl_field("nu", &ExperimentConfig::nu),
        dbl_field("mu", &ExperimentConfig::mu),
        str_field("objective", &ExperimentConfig::objective),
        str_field("target", &ExperimentConfig::target),
        int_field("grid", &ExperimentConfig::grid),
        int_field("n_train", &ExperimentConfig::n_train),
        int_field("n_test", &ExperimentConfig::n_test),
        str_field("image", &ExperimentConfig::image),
        int_field("downsample", &ExperimentConfig::downsample),
        long_field("pixel_budget", &ExperimentConfig::pixel_budget),
        dbl_field("lambda", &ExperimentConfig::lambda),
        int_field("e1", &ExperimentConfig::e1),
        int_field("e2", &ExperimentConfig::e2),
        dbl_field("eta_start", &ExperimentConfig::eta_start),
        dbl_field("hold_frac", &ExperimentConfig::hold_frac),
        int_field("n_fft", &ExperimentConfig::n_fft),
        int_field("k_mode", &ExperimentConfig::k_mode),
        dbl_field("c_target", &ExperimentConfig::c_target),
        int_field("order", &ExperimentConfig::order),
        dbl_field("toy_eta", &ExperimentConfig::toy_eta),
        int_field("toy_steps", &ExperimentConfig::toy_steps),
        str_field("out_dir", &ExperimentConfig::out_dir),
        int_field("record_every", &ExperimentConfig::record_every),
        int_field("checkpoint_every", &ExperimentConfig::checkpoint_every),
    };
    return table;
}

bool one_of(const std::string& v, std::initializer_list<const char*> opts) {
    for (const char* o : opts)
        if (v == o) return true;
    return false;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
}

void validate(const ExperimentConfig& c) {
    require(one_of(c.variant, {"rff-nn", "rff-ca", "nn-ca"}), "variant must be rff-nn, rff-ca or nn-ca");
    require(c.m_base >= 1, "m_base must be >= 1");
    require(c.k_scales >= 0, "k_scales must be >= 0");
    require(c.sigma > 0.0, "sigma must be > 0");
    require(c.d_q >= 1, "d_q must be >= 1");
    require(c.n_heads >= 1, "n_heads must be >= 1");
    require(c.d_q % c.n_heads == 0, "d_q must be divisible by n_heads");
    require(c.layers >= 1, "layers must be >= 1");
    require(c.width >= 0, "width must be >= 0");
    require(c.low_width >= 1 && c.low_depth >= 1, "low net size must be >= 1");
    require(c.epochs >= 0, "epochs must be >= 0");
    require(c.batch >= 0, "batch must be >= 0");
    require(c.eta0 > 0.0, "eta0 must be > 0");
    require(c.lr_step >= 1, "lr_step must be >= 1");
    require(c.lr_gamma > 0.0 && c.lr_gamma <= 1.0, "lr_gamma must be in (0,1]");
    require(c.clip >= 0.0, "clip must be >= 0");
    require(c.weight_decay >= 0.0, "weight_decay must be >= 0");
    require(c.gamma >= 0.0, "gamma must be >= 0");
    require(c.n_r >= 1, "n_r must be >= 1");
    require(c.n_b >= 1, "n_b must be >= 1");
    require(c.fd_step > 0.0, "fd_step must be > 0");
    require(one_of(c.alpha, {"fixed", "learnable", "optimal"}), "alpha must be fixed, learnable or optimal");
    require(one_of(c.objective, {"regression", "ritz", "pinn"}), "objective must be regression, ritz or pinn");
    require(one_of(c.target, {"f1", "f2", "f3"}), "target must be f1, f2 or f3");
    require(c.grid >= 2, "grid must be >= 2");
    require(c.n_train >= 1 && c.n_test >= 1, "n_train and n_test must be >= 1");
    require(c.downsample >= 1, "downsample must be >= 1");
    require(c.pixel_budget >= 1, "pixel_budget must be >= 1");
    require(c.lambda > 0.0 && c.lambda < 1.0, "lambda must be in (0,1)");
    require(c.e1 >= 0 && c.e2 >= 0, "e1 and e2 must be >= 0");
    require(c.eta_start <= 0.0, "eta_start must be <= 0");
    require(c.hold_frac >= 0.0 && c.hold_frac <= 1.0, "hold_frac must be in [0,1]");
    require(c.n_fft >= 2 && (c.n_fft & (c.n_fft - 1)) == 0, "n_fft must be a power of two >= 2");
    require(c.k_mode >= 1, "k_mode must be >= 1");
    require(c.order >= 0 && c.order <= 4, "order must be in [0,4]");
    require(c.toy_eta > 0.0, "toy_eta must be > 0");
    require(c.toy_steps >= 0, "toy_steps must be >= 0");
    require(c.record_every >= 1, "record_every must be >= 1");
    require(c.checkpoint_every >= 0, "checkpoint_every must be >= 0");
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "regress", "image", "afe", "heatmap", "poisson1d", "poisson2d", "pb3d", "appendix"};
    return names;
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "regress") {
        c.epochs = 1000;
        c.batch = 4000;
        c.eta0 = 2e-3;
        c.lr_step = 100;
        c.lr_gamma = 0.5;
    } else if (experiment == "image") {
        c.epochs = 5000;
        c.batch = 0;
        c.eta0 = 2e-3;
        c.lr_step = 1000;
        c.lr_gamma = 0.5;
        c.variant = "nn-ca";
        c.record_every = 50;
    } else if (experiment == "afe") {
        c.k_scales = 0;
        c.layers = 3;
        c.sigma = 0.01;
        c.eta0 = 1e-3;
        c.lr_step = 500;
        c.lr_gamma = 0.9;
        c.record_every = 250;
        c.epochs = c.e1 + c.e2;
    } else if (experiment == "heatmap") {
        c.variant = "rff-nn";
        c.m_base = 64;
        c.k_scales = 2;
        c.width = 64;
        c.layers = 2;
        c.d_q = 32;
        c.n_heads = 2;
        c.epochs = 2000;
        c.eta0 = 1e-3;
        c.grid = 256;
        c.n_r = 256;
        c.gamma = 100.0;
        c.objective = "pinn";
        c.record_every = 20;
    } else if (experiment == "poisson1d") {
        c.sigma = 0.02;
        c.nu = 100.0;
        c.alpha = "optimal";
        c.epochs = 5000;
        c.eta0 = 1e-3;
        c.lr_step = 1000;
        c.lr_gamma = 0.5;
        c.n_r = 1000;
        c.gamma = 1e4;
    } else if (experiment == "poisson2d") {
        c.sigma = 0.02;
        c.mu = 50.0;
        c.alpha = "optimal";
        c.epochs = 20000;
        c.eta0 = 1e-3;
        c.lr_step = 2000;
        c.lr_gamma = 0.5;
        c.n_r = 10000;
        c.n_b = 1000;
        c.gamma = 1e4;
        c.record_every = 100;
    } else if (experiment == "pb3d") {
        c.sigma = 1.0;
        c.mu = 15.0;
        c.layers = 3;
        c.alpha = "learnable";
        c.objective = "ritz";
        c.epochs = 10000;
        c.eta0 = 1e-3;
        c.lr_step = 1000;
        c.lr_gamma = 0.6;
        c.n_r = 5000;
        c.n_b = 4000;
        c.gamma = 1e4;
        c.record_every = 100;
    } else if (experiment == "appendix") {
        c.epochs = 0;
    } else {
        throw ConfigError("config: unknown experiment '" + experiment + "'");
    }
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    bool have_section = false;
    std::vector<std::string> seen;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            if (have_section) fail(line, "more than one section");
            std::string name = trim(s.substr(1, s.size() - 2));
            bool known = false;
            for (const auto& e : experiment_names()) known = known || e == name;
            if (!known) fail(line, "unknown experiment '" + name + "'");
            cfg = default_config(name);
            have_section = true;
            continue;
        }
        if (!have_section) fail(line, "key before the [experiment] section header");
        size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key=value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        const Field* field = nullptr;
        for (const auto& f : fields())
            if (key == f.key) field = &f;
        if (!field) fail(line, "unknown key '" + key + "'");
        for (const auto& k : seen)
            if (k == key) fail(line, "duplicate key '" + key + "'");
        seen.push_back(key);
        field->set(cfg, value, line);
    }
    if (!have_section) throw ConfigError("config: missing [experiment] section header");
    validate(cfg);
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out = "[" + cfg.experiment + "]\n";
    for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    return out;
}

}  // namespace sca
