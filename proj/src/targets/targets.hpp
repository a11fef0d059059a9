#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace sca {

// 2D regression benchmarks on [-1,1]^2: a multi-mechanism composite, a
// swirl-modulated cosine, and a checkerboard sign pattern.
double f1(double x1, double x2);
double f2(double x1, double x2);
double f3(double x1, double x2);

// Three-mode 1D Poisson benchmark on [-1,1]: u and f = -u''.
double heatmap_target(double x);
double heatmap_source(double x);

// Periodic 1D target with a sparse spectrum at modes {2, 20, 40} of [0,1).
double afe_target(double x);

// Five-mode 1D Poisson family on [-1,1], frequencies scaling with nu.
double poisson1d_exact(double x, double nu);
double poisson1d_source(double x, double nu);

// Separable oscillatory 2D Poisson problem on [-1,1]^2.
double poisson2d_exact(double x1, double x2, double mu);
double poisson2d_source(double x1, double x2, double mu);

// 3D reaction-diffusion benchmark on the unit ball, zero on its surface.
// The source depends on the local reaction coefficient kappa, which the
// caller resolves from the geometry.
double pb_exact(const std::array<double, 3>& x, double mu);
double pb_laplacian(const std::array<double, 3>& x, double mu);
double pb_source(const std::array<double, 3>& x, double mu, double kappa);

// Uniform closed grid of n points covering [a, b], endpoints included.
std::vector<double> uniform_grid(int n, double a, double b);

// fn evaluated on the closed n-by-n tensor grid over [-1,1]^2; row r is
// x2 = grid[r], column q is x1 = grid[q].
Tensor eval_grid_2d(const std::function<double(double, double)>& fn, int n);

// Named lookup used by run configs; dim tells callers how to sample inputs.
struct TargetFn {
    std::string name;
    int dim = 1;
    std::function<double(const std::vector<double>&)> value;
};

const TargetFn& target_by_name(const std::string& name);
std::vector<std::string> target_names();

}  // namespace sca
