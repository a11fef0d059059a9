#include "pde/pde.hpp"

#include <cmath>
#include <numbers>

#include "core/errors.hpp"

namespace sca {

namespace {

void check_domain(const Domain& dom) {
    if (dom.dim < 1 || dom.dim > 3) throw ConfigError("domain: dimension must be 1, 2, or 3");
}

std::vector<double> row_point(const Tensor& X, int r) {
    std::vector<double> p(size_t(X.cols()));
    for (int c = 0; c < X.cols(); ++c) p[size_t(c)] = X(r, c);
    return p;
}

// Pointwise evaluation of a coefficient function into an N x 1 constant.
Tensor eval_points(const PointFn& fn, const Tensor& X) {
    Tensor out(X.rows(), 1);
    for (int r = 0; r < X.rows(); ++r) out(r, 0) = fn(row_point(X, r));
    return out;
}

}  // namespace

Tensor sample_interior(const Domain& dom, int n, Rng& rng) {
    check_domain(dom);
    if (n < 1) throw ContractError("sample_interior: need n >= 1");
    Tensor X(n, dom.dim);
    if (dom.kind == DomainKind::kBox) {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < dom.dim; ++c) X(r, c) = rng.uniform(-1.0, 1.0);
        return X;
    }
    for (int r = 0; r < n; ++r) {
        double s;
        do {
            s = 0.0;
            for (int c = 0; c < dom.dim; ++c) {
                X(r, c) = rng.uniform(-1.0, 1.0);
                s += X(r, c) * X(r, c);
            }
        } while (s > 1.0);
    }
    return X;
}

Tensor sample_boundary(const Domain& dom, int n, Rng& rng) {
    check_domain(dom);
    if (n < 1) throw ContractError("sample_boundary: need n >= 1");
    if (dom.kind == DomainKind::kBox) {
        Tensor X(2 * dom.dim * n, dom.dim);
        int row = 0;
        for (int axis = 0; axis < dom.dim; ++axis)
            for (double side : {-1.0, 1.0})
                for (int i = 0; i < n; ++i, ++row)
                    for (int c = 0; c < dom.dim; ++c)
                        X(row, c) = (c == axis) ? side : rng.uniform(-1.0, 1.0);
        return X;
    }
    Tensor X(n, dom.dim);
    for (int r = 0; r < n; ++r) {
        double s;
        do {
            s = 0.0;
            for (int c = 0; c < dom.dim; ++c) {
                X(r, c) = rng.gaussian();
                s += X(r, c) * X(r, c);
            }
        } while (s == 0.0);
        double inv = 1.0 / std::sqrt(s);
        for (int c = 0; c < dom.dim; ++c) X(r, c) *= inv;
    }
    return X;
}

BallUnionDomain build_pb_domain(std::uint64_t seed) {
    BallUnionDomain dom;
    dom.seed = seed;
    Rng rng(seed);
    Rng centers = rng.stream("pb.centers");
    Rng radii = rng.stream("pb.radii");
    for (int i = 0; i < 20; ++i) {
        double g[3], s;
        do {
            s = 0.0;
            for (double& c : g) {
                c = centers.gaussian();
                s += c * c;
            }
        } while (s == 0.0);
        double scale = dom.big_radius / std::sqrt(s);
        for (int c = 0; c < 3; ++c) dom.centers(i, c) = g[c] * scale;
    }
    for (int i = 0; i < 20; ++i) dom.radii(0, i) = radii.uniform(0.1, 0.2);
    return dom;
}

bool in_omega1(const BallUnionDomain& dom, const std::array<double, 3>& x) {
    double s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    if (s <= dom.big_radius * dom.big_radius) return true;
    for (int i = 0; i < dom.centers.rows(); ++i) {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) {
            double t = x[size_t(c)] - dom.centers(i, c);
            d += t * t;
        }
        if (d <= dom.radii(0, i) * dom.radii(0, i)) return true;
    }
    return false;
}

namespace {

// Stack [X; X+h e_0; X-h e_0; ...; X+h e_{d-1}; X-h e_{d-1}] so the whole
// stencil pattern needs a single batched network call.
Tensor stencil_rows(const Tensor& X, double h) {
    int n = X.rows(), d = X.cols();
    Tensor S((2 * d + 1) * n, d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) S(r, c) = X(r, c);
    for (int axis = 0; axis < d; ++axis)
        for (int sign = 0; sign < 2; ++sign) {
            int base = (1 + 2 * axis + sign) * n;
            double delta = sign == 0 ? h : -h;
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c)
                    S(base + r, c) = X(r, c) + (c == axis ? delta : 0.0);
        }
    return S;
}

void check_step(double h) {
    if (!(h > 0.0)) throw ContractError("finite-difference step must be positive");
}

// One batched evaluation of u on the full stencil, sliced into the center
// values plus the recorded Laplacian and gradient.
struct StencilEval {
    Var center;
    Var lap;
    Var grad;
};

StencilEval stencil_eval(Tape& t, const BatchFn& u, const Tensor& X, double h, bool want_lap,
                         bool want_grad) {
    check_step(h);
    int n = X.rows(), d = X.cols();
    Var all = u(t, stencil_rows(X, h));
    StencilEval out;
    out.center = t.slice_rows(all, 0, n);
    Var lap_acc{}, grad_acc{};
    for (int axis = 0; axis < d; ++axis) {
        Var up = t.slice_rows(all, (1 + 2 * axis) * n, (2 + 2 * axis) * n);
        Var um = t.slice_rows(all, (2 + 2 * axis) * n, (3 + 2 * axis) * n);
        if (want_lap) {
            Var pair = t.add(up, um);
            lap_acc = axis == 0 ? pair : t.add(lap_acc, pair);
        }
        if (want_grad) {
            Var g = t.scale(t.add(up, t.scale(um, -1.0)), 1.0 / (2.0 * h));
            grad_acc = axis == 0 ? g : t.concat_cols(grad_acc, g);
        }
    }
    if (want_lap) {
        lap_acc = t.add(lap_acc, t.scale(out.center, -2.0 * d));
        out.lap = t.scale(lap_acc, 1.0 / (h * h));
    }
    if (want_grad) out.grad = grad_acc;
    return out;
}

}  // namespace

Var fd_laplacian_batch(Tape& t, const BatchFn& u, const Tensor& X, double h) {
    return stencil_eval(t, u, X, h, true, false).lap;
}

Var fd_gradient_batch(Tape& t, const BatchFn& u, const Tensor& X, double h) {
    return stencil_eval(t, u, X, h, false, true).grad;
}

Var fd_laplacian(Tape& t, const BatchFn& u, const std::vector<double>& x, double h) {
    Tensor X(1, int(x.size()));
    for (size_t c = 0; c < x.size(); ++c) X(0, int(c)) = x[c];
    return fd_laplacian_batch(t, u, X, h);
}

std::vector<double> fd_gradient_vec(Tape& t, const BatchFn& u, const std::vector<double>& x,
                                    double h) {
    Tensor X(1, int(x.size()));
    for (size_t c = 0; c < x.size(); ++c) X(0, int(c)) = x[c];
    Tensor g = t.val(fd_gradient_batch(t, u, X, h));
    std::vector<double> out(x.size());
    for (size_t c = 0; c < x.size(); ++c) out[c] = g(0, int(c));
    return out;
}

namespace {

void check_problem(const PdeProblem& prob) {
    check_domain(prob.domain);
    if (prob.gamma < 0.0) throw ConfigError("pde problem: gamma must be non-negative");
    if (!(prob.fd_step > 0.0)) throw ConfigError("pde problem: fd step must be positive");
    if (!prob.source) throw ConfigError("pde problem: source term missing");
}

// N[u] = -lap(u) + kappa*u built from one stencil pass.
Var operator_from_stencil(Tape& t, const PdeProblem& prob, const StencilEval& se,
                          const Tensor& Xr) {
    Var neg_lap = t.scale(se.lap, -1.0);
    if (!prob.kappa) return neg_lap;
    Tensor k = eval_points(prob.kappa, Xr);
    return t.add(neg_lap, t.mul(t.constant(k), se.center));
}

Var boundary_mismatch_sq(Tape& t, const PdeProblem& prob, Var ub, const Tensor& Xb) {
    Var diff = ub;
    if (prob.boundary_data) {
        Tensor g = eval_points(prob.boundary_data, Xb);
        diff = t.add(ub, t.scale(t.constant(g), -1.0));
    }
    return t.square(diff);
}

}  // namespace

Var apply_operator(Tape& t, const PdeProblem& prob, const BatchFn& u, const Tensor& Xr) {
    check_problem(prob);
    StencilEval se = stencil_eval(t, u, Xr, prob.fd_step, true, false);
    return operator_from_stencil(t, prob, se, Xr);
}

Var pinn_loss(Tape& t, const PdeProblem& prob, const BatchFn& u, const Tensor& Xr,
              const Tensor& Xb) {
    check_problem(prob);
    Var resid = t.add(apply_operator(t, prob, u, Xr),
                      t.scale(t.constant(eval_points(prob.source, Xr)), -1.0));
    Var loss = t.mean_all(t.square(resid));
    if (prob.gamma > 0.0) {
        Var ub = u(t, Xb);
        loss = t.add(loss, t.scale(t.mean_all(boundary_mismatch_sq(t, prob, ub, Xb)), prob.gamma));
    }
    return loss;
}

Var ritz_loss(Tape& t, const PdeProblem& prob, const BatchFn& u, const Tensor& Xr,
              const Tensor& Xb) {
    check_problem(prob);
    StencilEval se = stencil_eval(t, u, Xr, prob.fd_step, false, true);
    Var grad_sq = t.sum_cols(t.square(se.grad));  // |grad u|^2 per point, N x 1
    Var density = t.scale(grad_sq, 0.5);
    if (prob.kappa) {
        Tensor k = eval_points(prob.kappa, Xr);
        density = t.add(density, t.scale(t.mul(t.constant(k), t.square(se.center)), 0.5));
    }
    density = t.add(density,
                    t.scale(t.mul(t.constant(eval_points(prob.source, Xr)), se.center), -1.0));
    Var loss = t.scale(t.mean_all(density), domain_volume(prob.domain));
    if (prob.gamma > 0.0) {
        Var ub = u(t, Xb);
        loss = t.add(loss, t.scale(t.mean_all(boundary_mismatch_sq(t, prob, ub, Xb)),
                                   prob.gamma * boundary_measure(prob.domain)));
    }
    return loss;
}

namespace {

// Closed-form alpha from tape values: correlation of the u_h residual with
// N[u_l] over the interior, against the operator energy of u_l plus the
// boundary mass. Reads values only; no gradient reaches alpha.
double alpha_from_values(const PdeProblem& prob, const Tensor& op_h, const Tensor& op_l,
                         const Tensor& f, const Tensor& ulb) {
    double num = 0.0, den_r = 0.0, den_b = 0.0;
    int n = op_h.rows();
    for (int r = 0; r < n; ++r) {
        double resid_h = op_h(r, 0) - f(r, 0);
        num += resid_h * op_l(r, 0);
        den_r += op_l(r, 0) * op_l(r, 0);
    }
    num /= double(n);
    den_r /= double(n);
    for (int r = 0; r < ulb.rows(); ++r) den_b += ulb(r, 0) * ulb(r, 0);
    den_b /= double(ulb.rows());
    double den = den_r + prob.gamma * den_b;
    if (den <= 1e-30)
        throw NumericError("alpha_optimal: degenerate low-frequency component (denominator " +
                           std::to_string(den) + ")");
    return -num / den;
}

}  // namespace

double alpha_optimal(const PdeProblem& prob, const BatchFn& u_h, const BatchFn& u_l,
                     ParamStore& store, const Tensor& Xr, const Tensor& Xb) {
    check_problem(prob);
    Tape t(&store);
    Var op_h = apply_operator(t, prob, u_h, Xr);
    Var op_l = apply_operator(t, prob, u_l, Xr);
    Var ulb = u_l(t, Xb);
    return alpha_from_values(prob, t.val(op_h), t.val(op_l), eval_points(prob.source, Xr),
                             t.val(ulb));
}

void register_alpha_param(ParamStore& store, const MixedConfig& cfg, double init) {
    store.add(cfg.alpha_param, Tensor::scalar(init));
}

MixedLoss mixed_pinn_loss(Tape& t, const PdeProblem& prob, const BatchFn& u_h, const BatchFn& u_l,
                          const MixedConfig& cfg, const Tensor& Xr, const Tensor& Xb) {
    check_problem(prob);
    MixedLoss out;

    Var op_h = apply_operator(t, prob, u_h, Xr);
    Var op_l = apply_operator(t, prob, u_l, Xr);
    Tensor f = eval_points(prob.source, Xr);
    Var uhb{}, ulb{};
    bool want_boundary = prob.gamma > 0.0;
    if (want_boundary || cfg.strategy == AlphaStrategy::kOptimal) {
        uhb = u_h(t, Xb);
        ulb = u_l(t, Xb);
    }

    bool learnable = cfg.strategy == AlphaStrategy::kLearnable;
    Var alpha_var{};
    if (cfg.strategy == AlphaStrategy::kOptimal) {
        out.alpha = alpha_from_values(prob, t.val(op_h), t.val(op_l), f, t.val(ulb));
    } else if (learnable) {
        alpha_var = t.param(cfg.alpha_param);
        out.alpha = t.val(alpha_var).item();
    } else {
        out.alpha = cfg.fixed_value;
    }

    // Residual N[u_h] + alpha*N[u_l] - f; the operator is linear in u.
    Var scaled_l = learnable
                       ? t.mul(t.matmul(t.constant(Tensor::full(Xr.rows(), 1, 1.0)), alpha_var),
                               op_l)
                       : t.scale(op_l, out.alpha);
    Var resid = t.add(t.add(op_h, scaled_l), t.scale(t.constant(f), -1.0));
    Var loss = t.mean_all(t.square(resid));

    if (want_boundary) {
        Var bh = boundary_mismatch_sq(t, prob, uhb, Xb);
        Var bl = t.square(ulb);
        if (cfg.strategy == AlphaStrategy::kFixed) {
            bl = t.scale(bl, out.alpha * out.alpha);
        } else if (learnable) {
            Var a2 = t.square(alpha_var);
            bl = t.mul(t.matmul(t.constant(Tensor::full(Xb.rows(), 1, 1.0)), a2), bl);
        }
        // optimal strategy: the boundary term stays alpha-free
        loss = t.add(loss, t.scale(t.mean_all(t.add(bh, bl)), prob.gamma));
    }
    out.loss = loss;
    return out;
}

Tensor mixed_eval(ParamStore& store, const BatchFn& u_h, const BatchFn& u_l, double alpha,
                  const Tensor& X) {
    Tape t(&store);
    Var mix = t.add(u_h(t, X), t.scale(u_l(t, X), alpha));
    return t.val(mix);
}

double domain_volume(const Domain& dom) {
    check_domain(dom);
    if (dom.kind == DomainKind::kBox) return std::pow(2.0, dom.dim);
    switch (dom.dim) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        default: return 4.0 * std::numbers::pi / 3.0;
    }
}

double boundary_measure(const Domain& dom) {
    check_domain(dom);
    if (dom.kind == DomainKind::kBox) return 2.0 * dom.dim * std::pow(2.0, dom.dim - 1);
    switch (dom.dim) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        default: return 4.0 * std::numbers::pi;
    }
}

}  // namespace sca
