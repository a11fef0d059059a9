#include "spectral/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

#include "core/errors.hpp"

namespace sca {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// Iterative radix-2 decimation-in-time transform, in place.
void fft_pow2(std::vector<std::complex<double>>& a) {
    size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * kPi / double(len);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace

Spectrum dft_real(const std::vector<double>& values, double length) {
    size_t n = values.size();
    if (n < 2) throw ContractError("dft_real: need at least 2 samples");
    if (!is_pow2(n)) return dft_real_direct(values, length);
    Spectrum s;
    s.n = int(n);
    s.length = length;
    size_t half = n / 2;
    std::vector<std::complex<double>> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = values[i];
    fft_pow2(a);
    s.coef.assign(a.begin(), a.begin() + long(half) + 1);
    return s;
}

Spectrum dft_real_direct(const std::vector<double>& values, double length) {
    size_t n = values.size();
    if (n < 2) throw ContractError("dft_real: need at least 2 samples");
    Spectrum s;
    s.n = int(n);
    s.length = length;
    size_t half = n / 2;
    s.coef.resize(half + 1);
    // Extended-precision accumulation keeps the O(n^2) sum accurate enough
    // to serve as a reference for the fast path at large n.
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    for (size_t k = 0; k <= half; ++k) {
        long double re = 0.0L, im = 0.0L;
        for (size_t i = 0; i < n; ++i) {
            long double ang = -two_pi * static_cast<long double>(k) *
                              static_cast<long double>(i) / static_cast<long double>(n);
            re += values[i] * std::cos(ang);
            im += values[i] * std::sin(ang);
        }
        s.coef[k] = {static_cast<double>(re), static_cast<double>(im)};
    }
    return s;
}

double spectrum_energy(const Spectrum& s) {
    if (s.coef.empty()) throw ContractError("spectrum_energy: empty spectrum");
    double acc = std::norm(s.coef[0]);
    size_t half = s.coef.size() - 1;
    bool even = (s.n % 2 == 0);
    for (size_t k = 1; k <= half; ++k) {
        double e = std::norm(s.coef[k]);
        bool self_conjugate = even && k == half;
        acc += self_conjugate ? e : 2.0 * e;
    }
    return acc / double(s.n);
}

std::vector<int> dominant_modes(const Spectrum& s, double lambda) {
    if (lambda <= 0.0 || lambda >= 1.0)
        throw ConfigError("dominant_modes: threshold must be in (0, 1)");
    double peak = 0.0;
    for (const auto& c : s.coef) peak = std::max(peak, std::abs(c));
    std::vector<int> modes;
    if (peak == 0.0) return modes;
    for (size_t k = 0; k < s.coef.size(); ++k)
        if (std::abs(s.coef[k]) > lambda * peak) modes.push_back(int(k));
    return modes;
}

std::vector<double> mode_projection(const std::vector<double>& u_grid,
                                    const std::vector<int>& modes) {
    size_t n = u_grid.size();
    if (n < 3) throw ContractError("mode_projection: need at least 3 grid points");
    double dx = 2.0 / double(n - 1);
    auto trapz = [&](auto f) {
        double acc = 0.5 * (f(0) + f(n - 1));
        for (size_t i = 1; i + 1 < n; ++i) acc += f(i);
        return acc * dx;
    };
    std::vector<double> out;
    out.reserve(modes.size());
    for (int k : modes) {
        auto basis = [&](size_t i) { return std::sin(double(k) * kPi * (-1.0 + double(i) * dx)); };
        double num = trapz([&](size_t i) { return u_grid[i] * basis(i); });
        double den = trapz([&](size_t i) { return basis(i) * basis(i); });
        if (den <= 0.0) throw ContractError("mode_projection: degenerate basis for mode " +
                                            std::to_string(k));
        out.push_back(num / den);
    }
    return out;
}

std::vector<double> freq_error(const std::vector<std::complex<double>>& pred,
                               const std::vector<std::complex<double>>& truth) {
    if (pred.size() != truth.size())
        throw ShapeError("freq_error: coefficient counts differ");
    std::vector<double> out(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) {
        double t = std::abs(truth[i]);
        if (t == 0.0) {
            std::cerr << "freq_error: true coefficient " << i << " is zero, mode skipped\n";
            out[i] = std::nan("");
        } else {
            out[i] = std::abs(pred[i] - truth[i]) / t;
        }
    }
    return out;
}

double rel_l2(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ShapeError("rel_l2: shapes " + a.shape_str() + " vs " + b.shape_str());
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a.at(i) - b.at(i);
        num += d * d;
        den += b.at(i) * b.at(i);
    }
    if (den == 0.0) throw ContractError("rel_l2: reference is identically zero");
    return std::sqrt(num / den);
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ShapeError("rel_l2: lengths differ");
    if (a.empty()) throw ContractError("rel_l2: empty input");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        num += d * d;
        den += b[i] * b[i];
    }
    if (den == 0.0) throw ContractError("rel_l2: reference is identically zero");
    return std::sqrt(num / den);
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    if (!a.same_shape(b))
        throw ShapeError("psnr: shapes " + a.shape_str() + " vs " + b.shape_str());
    if (peak <= 0.0) throw ConfigError("psnr: peak must be positive");
    double mse = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a.at(i) - b.at(i);
        mse += d * d;
    }
    mse /= double(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

Tensor log_kernel(int size, double sigma) {
    if (size < 3 || size % 2 == 0) throw ConfigError("log_kernel: size must be odd and >= 3");
    if (sigma <= 0.0) throw ConfigError("log_kernel: sigma must be positive");
    Tensor k(size, size);
    int c = size / 2;
    double s2 = sigma * sigma;
    for (int r = 0; r < size; ++r)
        for (int q = 0; q < size; ++q) {
            double x = r - c, y = q - c;
            double r2 = x * x + y * y;
            k(r, q) = (r2 - 2.0 * s2) / (s2 * s2) * std::exp(-r2 / (2.0 * s2));
        }
    double mean = 0.0;
    for (size_t i = 0; i < k.size(); ++i) mean += k.at(i);
    mean /= double(k.size());
    for (size_t i = 0; i < k.size(); ++i) k.at(i) -= mean;
    return k;
}

namespace {

// Zero-padded valid-size convolution (correlation; the kernel is symmetric).
Tensor filter2d(const Tensor& img, const Tensor& kern) {
    int half = kern.rows() / 2;
    Tensor out(img.rows(), img.cols());
    for (int r = 0; r < img.rows(); ++r)
        for (int q = 0; q < img.cols(); ++q) {
            double acc = 0.0;
            for (int dr = -half; dr <= half; ++dr) {
                int rr = r + dr;
                if (rr < 0 || rr >= img.rows()) continue;
                for (int dq = -half; dq <= half; ++dq) {
                    int qq = q + dq;
                    if (qq < 0 || qq >= img.cols()) continue;
                    acc += img(rr, qq) * kern(dr + half, dq + half);
                }
            }
            out(r, q) = acc;
        }
    return out;
}

}  // namespace

double hfen(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
    if (a.size() != b.size() || a.empty())
        throw ShapeError("hfen: channel counts differ or empty");
    Tensor kern = log_kernel();
    // The zero-padded frame responds to flat image content, so the norms
    // run over the interior where the kernel never touches the padding.
    int half = kern.rows() / 2;
    double num = 0.0, den = 0.0, bmax = 0.0;
    long count = 0;
    for (size_t ch = 0; ch < a.size(); ++ch) {
        if (!a[ch].same_shape(b[ch]))
            throw ShapeError("hfen: channel " + std::to_string(ch) + " shapes " +
                             a[ch].shape_str() + " vs " + b[ch].shape_str());
        if (a[ch].rows() <= 2 * half || a[ch].cols() <= 2 * half)
            throw ShapeError("hfen: image " + a[ch].shape_str() + " smaller than the " +
                             std::to_string(kern.rows()) + "x" + std::to_string(kern.rows()) +
                             " filter support");
        for (size_t i = 0; i < b[ch].size(); ++i) bmax = std::max(bmax, std::abs(b[ch].at(i)));
        Tensor fa = filter2d(a[ch], kern);
        Tensor fb = filter2d(b[ch], kern);
        for (int r = half; r < fa.rows() - half; ++r)
            for (int q = half; q < fa.cols() - half; ++q) {
                double d = fa(r, q) - fb(r, q);
                num += d * d;
                den += fb(r, q) * fb(r, q);
                ++count;
            }
    }
    // A flat reference only leaves rounding residue of the zero-sum kernel
    // in the denominator; treat that as no high-frequency content at all.
    if (std::sqrt(den / double(count)) <= 1e-13 * (1.0 + bmax))
        throw ContractError("hfen: filtered reference is numerically zero");
    return std::sqrt(num / den);
}

double hfen(const Tensor& a, const Tensor& b) {
    return hfen(std::vector<Tensor>{a}, std::vector<Tensor>{b});
}

double gradient_ratio(int k, double c, int m) {
    if (k < 1) throw ConfigError("gradient_ratio: mode k must be >= 1");
    if (m < 0 || m > 2) throw ConfigError("gradient_ratio: operator order m must be 0, 1, or 2");
    return std::pow(double(k), 2.0 * m) * std::fabs(c);
}

Var toy_mode_loss(Tape& tape, int k, double c, int m) {
    if (k < 1) throw ConfigError("toy_mode_loss: mode k must be >= 1");
    if (m < 0 || m > 2) throw ConfigError("toy_mode_loss: operator order m must be 0, 1, or 2");
    Var c1 = tape.param("toy.c1");
    Var c2 = tape.param("toy.c2");
    double w1 = std::pow(kPi, 2.0 * m);
    double w2 = std::pow(double(k) * kPi, 2.0 * m);
    Var d1 = tape.add(c1, tape.scalar_const(-1.0));
    Var d2 = tape.add(c2, tape.scalar_const(-c));
    return tape.scale(tape.add(tape.scale(tape.square(d1), w1), tape.scale(tape.square(d2), w2)),
                      0.5);
}

ModeTrajectories toy_mode_dynamics(int k, double c, int m, double eta, int steps) {
    if (k < 1) throw ConfigError("toy_mode_dynamics: mode k must be >= 1");
    if (m < 0 || m > 2) throw ConfigError("toy_mode_dynamics: operator order m must be 0, 1, or 2");
    if (steps < 0) throw ContractError("toy_mode_dynamics: negative step count");
    double w1 = std::pow(kPi, 2.0 * m);
    double w2 = std::pow(double(k) * kPi, 2.0 * m);
    if (eta <= 0.0 || eta * w2 >= 2.0)
        throw ConfigError("toy_mode_dynamics: step size " + std::to_string(eta) +
                          " unstable for mode-" + std::to_string(k) + " curvature");
    ModeTrajectories tr;
    tr.c1.resize(size_t(steps) + 1);
    tr.c2.resize(size_t(steps) + 1);
    tr.c1_closed.resize(size_t(steps) + 1);
    tr.c2_closed.resize(size_t(steps) + 1);
    double c1 = 0.0, c2 = 0.0;
    for (int t = 0; t <= steps; ++t) {
        tr.c1[size_t(t)] = c1;
        tr.c2[size_t(t)] = c2;
        tr.c1_closed[size_t(t)] = 1.0 - std::exp(-eta * w1 * t);
        tr.c2_closed[size_t(t)] = c * (1.0 - std::exp(-eta * w2 * t));
        c1 -= eta * w1 * (c1 - 1.0);
        c2 -= eta * w2 * (c2 - c);
    }
    return tr;
}

}  // namespace sca
