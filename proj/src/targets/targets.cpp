#include "targets/targets.hpp"

#include <cmath>
#include <numbers>

#include "core/errors.hpp"

namespace sca {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sigmoid_k(double t, double k) { return 1.0 / (1.0 + std::exp(-k * t)); }

// Smooth angular gate: close to 1 inside the arc (a0, a1), 0 outside, with
// wraparound handled through the atan2 of the angle difference.
double angular_gate(double theta, double a0, double a1, double k) {
    double mid = 0.5 * (a0 + a1);
    double dist = std::fabs(std::atan2(std::sin(theta - mid), std::cos(theta - mid)));
    return sigmoid_k(0.5 * (a1 - a0) - dist, k);
}

// Smooth radial band-pass: close to 1 for r in (r1, r2).
double band_pass(double r, double r1, double r2, double k) {
    return sigmoid_k(r - r1, k) * (1.0 - sigmoid_k(r - r2, k));
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double f1(double x1, double x2) {
    double r = std::sqrt(x1 * x1 + x2 * x2);
    double theta = (x1 == 0.0 && x2 == 0.0) ? 0.0 : std::atan2(x2, x1);
    constexpr double arcs[3][2] = {{-0.9 * kPi, -0.3 * kPi},
                                   {-0.1 * kPi, 0.5 * kPi},
                                   {0.6 * kPi, 0.95 * kPi}};
    double acc = 0.0;
    for (const auto& a : arcs)
        acc += 0.35 * angular_gate(theta, a[0], a[1], 50.0) *
               std::cos(kTwoPi * (2.2 + 2.5 * r) *
                        (x1 * std::cos(2.5 * theta) + x2 * std::sin(2.5 * theta)));
    acc += 0.40 * band_pass(r, 0.62, 0.78, 60.0) *
           std::cos(kTwoPi * (6.0 + 5.0 * r) *
                    (x1 * std::cos(3.0 * theta) + x2 * std::sin(3.0 * theta)));
    double r_ring = 0.2 + 0.15 * (theta + kPi) / kTwoPi;
    acc += 0.28 * std::exp(-(r - r_ring) * (r - r_ring) / (2.0 * 0.04 * 0.04)) *
           std::cos(kTwoPi * (3.0 + 3.0 * r) *
                    (x1 * std::cos(theta + 0.8) + x2 * std::sin(theta + 0.8)));
    double r_star = 0.55 + 0.10 * std::cos(5.0 * theta);
    acc += 0.12 * sign_of(r - r_star);
    acc += 0.10 * std::cos(6.0 * kPi * x1) * std::cos(7.0 * kPi * x2);
    return acc;
}

double f2(double x1, double x2) {
    double r = std::sqrt(x1 * x1 + x2 * x2);
    double theta = (x1 == 0.0 && x2 == 0.0) ? 0.0 : std::atan2(x2, x1);
    constexpr double kappa = 5.0, w0 = 4.0, w1 = 3.0;
    return std::cos(kTwoPi * (w0 + w1 * r) *
                    (x1 * std::cos(kappa * theta) + x2 * std::sin(kappa * theta)));
}

double f3(double x1, double x2) {
    return sign_of(std::sin(kTwoPi * x1) * std::sin(kTwoPi * x2));
}

double heatmap_target(double x) {
    return std::sin(kPi * x) + std::sin(5.0 * kPi * x) + std::sin(20.0 * kPi * x);
}

double heatmap_source(double x) {
    double p2 = kPi * kPi;
    return p2 * std::sin(kPi * x) + 25.0 * p2 * std::sin(5.0 * kPi * x) +
           400.0 * p2 * std::sin(20.0 * kPi * x);
}

double afe_target(double x) {
    return std::sin(kTwoPi * 2.0 * x) + 0.5 * std::sin(kTwoPi * 20.0 * x + 0.3) +
           0.5 * std::cos(kTwoPi * 40.0 * x - 0.2);
}

namespace {

// Amplitude/frequency pairs of the five-mode solution; the frequency third
// stays the exact floating quotient nu/3.
void poisson1d_modes(double nu, double amps[5], double freqs[5]) {
    const double a[5] = {1.0, 0.2, 0.4, 0.6, 1.0};
    const double w[5] = {0.1 * kPi, kPi, (nu / 3.0) * kPi, 2.0 * (nu / 3.0) * kPi, nu * kPi};
    for (int i = 0; i < 5; ++i) {
        amps[i] = a[i];
        freqs[i] = w[i];
    }
}

}  // namespace

double poisson1d_exact(double x, double nu) {
    double a[5], w[5];
    poisson1d_modes(nu, a, w);
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += a[i] * std::sin(w[i] * x);
    return acc;
}

double poisson1d_source(double x, double nu) {
    double a[5], w[5];
    poisson1d_modes(nu, a, w);
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += a[i] * w[i] * w[i] * std::sin(w[i] * x);
    return acc;
}

double poisson2d_exact(double x1, double x2, double mu) {
    return std::sin(mu * x1 * x1) + std::sin(mu * x2 * x2);
}

double poisson2d_source(double x1, double x2, double mu) {
    auto term = [mu](double x) {
        return 4.0 * mu * mu * x * x * std::sin(mu * x * x) - 2.0 * mu * std::cos(mu * x * x);
    };
    return term(x1) + term(x2);
}

double pb_exact(const std::array<double, 3>& x, double mu) {
    double s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    double e = std::exp(std::sin(mu * x[0]) + std::sin(mu * x[1]) + std::sin(mu * x[2]));
    return e / (s + 1.0) * (s - 1.0);
}

double pb_laplacian(const std::array<double, 3>& x, double mu) {
    // u = E * g with E = exp(sum sin(mu x_i)), g = (s-1)/(s+1), s = |x|^2:
    //   du/dx_i   = E mu cos(mu x_i) g + E * 4 x_i/(s+1)^2
    //   Delta u   = g Delta E + 2 grad E . grad g + E Delta g
    double s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    double e = std::exp(std::sin(mu * x[0]) + std::sin(mu * x[1]) + std::sin(mu * x[2]));
    double g = (s - 1.0) / (s + 1.0);
    double sp1 = s + 1.0;
    double lap_e_over_e = 0.0, dot = 0.0;
    for (int i = 0; i < 3; ++i) {
        double c = std::cos(mu * x[i]);
        lap_e_over_e += mu * mu * (c * c - std::sin(mu * x[i]));
        dot += x[i] * c;
    }
    double lap_g = 12.0 / (sp1 * sp1) - 16.0 * s / (sp1 * sp1 * sp1);
    return e * (lap_e_over_e * g + 8.0 * mu * dot / (sp1 * sp1) + lap_g);
}

double pb_source(const std::array<double, 3>& x, double mu, double kappa) {
    return -pb_laplacian(x, mu) + kappa * pb_exact(x, mu);
}

std::vector<double> uniform_grid(int n, double a, double b) {
    if (n < 2) throw ContractError("uniform_grid: need at least 2 points");
    if (!(b > a)) throw ContractError("uniform_grid: empty interval");
    std::vector<double> g(static_cast<size_t>(n));
    double step = (b - a) / double(n - 1);
    for (int i = 0; i < n; ++i) g[size_t(i)] = a + step * double(i);
    g.back() = b;
    return g;
}

Tensor eval_grid_2d(const std::function<double(double, double)>& fn, int n) {
    std::vector<double> g = uniform_grid(n, -1.0, 1.0);
    Tensor out(n, n);
    for (int r = 0; r < n; ++r)
        for (int q = 0; q < n; ++q) out(r, q) = fn(g[size_t(q)], g[size_t(r)]);
    return out;
}

namespace {

std::vector<TargetFn> make_registry() {
    std::vector<TargetFn> reg;
    auto wrap2 = [](double (*fn)(double, double)) {
        return [fn](const std::vector<double>& x) { return fn(x[0], x[1]); };
    };
    reg.push_back({"f1", 2, wrap2(&f1)});
    reg.push_back({"f2", 2, wrap2(&f2)});
    reg.push_back({"f3", 2, wrap2(&f3)});
    reg.push_back({"heatmap", 1, [](const std::vector<double>& x) { return heatmap_target(x[0]); }});
    reg.push_back({"afe", 1, [](const std::vector<double>& x) { return afe_target(x[0]); }});
    return reg;
}

const std::vector<TargetFn>& registry() {
    static const std::vector<TargetFn> reg = make_registry();
    return reg;
}

}  // namespace

const TargetFn& target_by_name(const std::string& name) {
    for (const auto& t : registry())
        if (t.name == name) return t;
    throw ConfigError("unknown target '" + name + "'");
}

std::vector<std::string> target_names() {
    std::vector<std::string> names;
    for (const auto& t : registry()) names.push_back(t.name);
    return names;
}

}  // namespace sca
