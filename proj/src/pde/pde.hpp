#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace sca {

// Sampling domains: the box [-1,1]^d or the unit ball.
enum class DomainKind { kBox, kBall };

struct Domain {
    DomainKind kind = DomainKind::kBox;
    int dim = 1;
};

// Uniform interior samples, one point per row. Ball domains use rejection
// sampling from the bounding cube.
Tensor sample_interior(const Domain& dom, int n, Rng& rng);

// Boundary samples: n per face for boxes (2*d*n rows), n uniform points on
// the unit sphere for balls (normalized Gaussian draws).
Tensor sample_boundary(const Domain& dom, int n, Rng& rng);

// Union-of-balls geometry: a central ball of radius 0.5 plus 20 balls
// centered on its surface with radii drawn from U[0.1, 0.2], all truncated
// by the unit ball. Region 1 is the union; region 2 is the remainder.
struct BallUnionDomain {
    Tensor centers{20, 3};
    Tensor radii{1, 20};
    double big_radius = 0.5;
    double trunc_radius = 1.0;
    std::uint64_t seed = 0;
};

BallUnionDomain build_pb_domain(std::uint64_t seed);
bool in_omega1(const BallUnionDomain& dom, const std::array<double, 3>& x);

// Batched network evaluation: rows of X are points, result is N x 1.
using BatchFn = std::function<Var(Tape&, const Tensor&)>;
// Pointwise coefficient/data evaluators (source, boundary data, reaction).
using PointFn = std::function<double(const std::vector<double>&)>;

// Central-difference operators of a tape-evaluated function, recorded on
// the tape so parameter gradients flow through every stencil evaluation.
// All stencil points go through one batched call of u.
Var fd_laplacian_batch(Tape& tape, const BatchFn& u, const Tensor& X, double h);
Var fd_gradient_batch(Tape& tape, const BatchFn& u, const Tensor& X, double h);  // N x d

// Single-point conveniences.
Var fd_laplacian(Tape& tape, const BatchFn& u, const std::vector<double>& x, double h);
std::vector<double> fd_gradient_vec(Tape& tape, const BatchFn& u, const std::vector<double>& x,
                                    double h);

struct PdeProblem {
    Domain domain;
    PointFn source;          // f
    PointFn boundary_data;   // g; null means homogeneous
    PointFn kappa;           // reaction coefficient; null means 0
    double gamma = 1.0;      // boundary penalty weight
    int n_r = 1000;          // interior samples per epoch
    int n_b = 1;             // boundary samples per epoch (per face for boxes)
    double fd_step = 1e-4;   // stencil step of the recorded operators
};

// Operator application N[u] = -lap(u) + kappa*u on the given points.
Var apply_operator(Tape& tape, const PdeProblem& prob, const BatchFn& u, const Tensor& Xr);

// Squared-residual objective: mean over interior of (N[u]-f)^2 plus
// gamma times the mean over boundary of (u-g)^2.
Var pinn_loss(Tape& tape, const PdeProblem& prob, const BatchFn& u, const Tensor& Xr,
              const Tensor& Xb);

// Variational energy: |Omega|*mean(0.5*(|grad u|^2 + kappa u^2) - f*u)
// + gamma*|boundary|*mean((u-g)^2), with the measure factors of the domain.
Var ritz_loss(Tape& tape, const PdeProblem& prob, const BatchFn& u, const Tensor& Xr,
              const Tensor& Xb);

// Closed-form mixing factor for u = u_h + alpha*u_l under a linear
// operator, frozen from current parameter values (no gradient flows).
double alpha_optimal(const PdeProblem& prob, const BatchFn& u_h, const BatchFn& u_l,
                     ParamStore& store, const Tensor& Xr, const Tensor& Xb);

enum class AlphaStrategy { kFixed, kLearnable, kOptimal };

struct MixedConfig {
    AlphaStrategy strategy = AlphaStrategy::kFixed;
    double fixed_value = 0.0;
    std::string alpha_param = "mix.alpha";  // used by the learnable strategy
};

// Registers the trainable alpha scalar for the learnable strategy.
void register_alpha_param(ParamStore& store, const MixedConfig& cfg, double init = 0.0);

struct MixedLoss {
    Var loss;
    double alpha = 0.0;  // value used this evaluation
};

// Two-network objective. Fixed/learnable strategies put alpha in both the
// residual and the boundary term (alpha^2 * u_l^2); the optimal strategy
// recomputes alpha in closed form on this sample, uses it in the residual
// only, and keeps the boundary term alpha-free (u_l^2).
MixedLoss mixed_pinn_loss(Tape& tape, const PdeProblem& prob, const BatchFn& u_h,
                          const BatchFn& u_l, const MixedConfig& cfg, const Tensor& Xr,
                          const Tensor& Xb);

// Mixture prediction u_h + alpha*u_l on arbitrary points.
Tensor mixed_eval(ParamStore& store, const BatchFn& u_h, const BatchFn& u_l, double alpha,
                  const Tensor& X);

// Measure factors used by ritz_loss.
double domain_volume(const Domain& dom);
double boundary_measure(const Domain& dom);

}  // namespace sca
