#pragma once

#include <complex>
#include <vector>

#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace sca {

// Half spectrum of a real-valued signal: coefficients for modes k = 0..N/2.
struct Spectrum {
    std::vector<std::complex<double>> coef;
    int n = 0;             // number of samples
    double length = 1.0;   // physical domain length the grid covers
};

// DFT of real samples on a periodic grid (right endpoint excluded).
// Power-of-two sizes go through a radix-2 FFT, everything else through the
// direct O(N^2) sum; both agree to 1e-10.
Spectrum dft_real(const std::vector<double>& values, double length = 1.0);

// Direct O(N^2) evaluation of the same transform, any size.
Spectrum dft_real_direct(const std::vector<double>& values, double length = 1.0);

// Signal energy implied by the half spectrum under the Hermitian extension,
// scaled so it equals sum(u_i^2) for the originating samples.
double spectrum_energy(const Spectrum& s);

// Modes whose magnitude exceeds lambda times the spectral peak, ascending.
// All-zero spectra yield the empty set. Scale-invariant in the coefficients.
std::vector<int> dominant_modes(const Spectrum& s, double lambda);

// Least-squares coefficients of sin(k*pi*x) for u sampled on a uniform
// closed grid over [-1, 1] (endpoints included), via trapezoid quadrature.
std::vector<double> mode_projection(const std::vector<double>& u_grid,
                                    const std::vector<int>& modes);

// Per-mode relative coefficient error |pred - truth| / |truth|. Modes whose
// true coefficient is zero are reported as NaN (with a stderr note) so
// callers can skip them.
std::vector<double> freq_error(const std::vector<std::complex<double>>& pred,
                               const std::vector<std::complex<double>>& truth);

double rel_l2(const Tensor& a, const Tensor& b);
double rel_l2(const std::vector<double>& a, const std::vector<double>& b);

// Peak signal-to-noise ratio in dB; +infinity when the grids are identical.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

// 15x15 Laplacian-of-Gaussian kernel, sigma in pixels, shifted to sum to 0.
Tensor log_kernel(int size = 15, double sigma = 1.5);

// High-frequency error norm: relative L2 distance between LoG-filtered
// images (zero-padded borders), accumulated over channels.
double hfen(const std::vector<Tensor>& a, const std::vector<Tensor>& b);
double hfen(const Tensor& a, const Tensor& b);

// Two-mode quadratic model of frequency learning: unit-amplitude mode 1 and
// amplitude-c mode k under a loss whose curvature carries the operator
// factor pi^{2m} per mode (m=0 regression, m=1 first-order energy, m=2
// residual). gradient_ratio is the analytic size of the initial mode-k
// gradient relative to mode 1.
double gradient_ratio(int k, double c, int m);

// The same model built on the tape from scalar parameters "toy.c1" and
// "toy.c2": L_m = 0.5*[pi^{2m}*(c1-1)^2 + (k*pi)^{2m}*(c2-c)^2].
Var toy_mode_loss(Tape& tape, int k, double c, int m);

// Explicit gradient-descent trajectories of the two-mode model from the
// origin, one entry per iteration (index 0 = initialization), paired with
// the continuous-time closed forms at the same iterations.
struct ModeTrajectories {
    std::vector<double> c1, c2;
    std::vector<double> c1_closed, c2_closed;
};

ModeTrajectories toy_mode_dynamics(int k, double c, int m, double eta, int steps);

}  // namespace sca
