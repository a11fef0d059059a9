#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/tape.hpp"
#include "doctest.h"
#include "net/attention_net.hpp"
#include "pde/pde.hpp"
#include "targets/targets.hpp"

using namespace sca;
using std::numbers::pi;

namespace {

// Closed-form test functions wrapped as batch evaluators. They hold no
// parameters, so the tape treats every stencil point as a constant.
BatchFn fn_of_x(std::function<double(const std::vector<double>&)> f) {
    return [f = std::move(f)](Tape& t, const Tensor& X) {
        Tensor out(X.rows(), 1);
        for (int r = 0; r < X.rows(); ++r) {
            std::vector<double> p(size_t(X.cols()));
            for (int c = 0; c < X.cols(); ++c) p[size_t(c)] = X(r, c);
            out(r, 0) = f(p);
        }
        return t.constant(out);
    };
}

Tensor col_from(std::vector<double> xs) {
    Tensor X(int(xs.size()), 1);
    for (size_t i = 0; i < xs.size(); ++i) X(int(i), 0) = xs[i];
    return X;
}

double max_abs(const Tensor& t) {
    double m = 0.0;
    for (int r = 0; r < t.rows(); ++r)
        for (int c = 0; c < t.cols(); ++c) m = std::max(m, std::abs(t(r, c)));
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("pde");

TEST_CASE("laplacian of quadratics and constants is exact") {
    Tape t(nullptr);
    BatchFn sq = fn_of_x([](const std::vector<double>& p) { return p[0] * p[0]; });
    Tensor X = col_from({-0.7, -0.1, 0.0, 0.4, 0.9});
    for (double h : {1e-2, 1e-3}) {
        Tensor lap = t.val(fd_laplacian_batch(t, sq, X, h));
        for (int r = 0; r < X.rows(); ++r) CHECK(std::abs(lap(r, 0) - 2.0) < 1e-8);
    }
    BatchFn cst = fn_of_x([](const std::vector<double>&) { return 3.25; });
    Tensor lap0 = t.val(fd_laplacian_batch(t, cst, X, 1e-3));
    CHECK(max_abs(lap0) == 0.0);
}

TEST_CASE("laplacian of a cubic is exact at moderate steps") {
    // The centered second difference of x^3 is 6x with no truncation term.
    Tape t(nullptr);
    BatchFn cube = fn_of_x([](const std::vector<double>& p) { return p[0] * p[0] * p[0]; });
    Tensor X = col_from({-0.9, -0.3, 0.2, 0.55, 0.8});
    for (double h : {1e-2, 1e-3}) {
        Tensor lap = t.val(fd_laplacian_batch(t, cube, X, h));
        for (int r = 0; r < X.rows(); ++r) CHECK(std::abs(lap(r, 0) - 6.0 * X(r, 0)) < 1e-8);
    }
}

TEST_CASE("laplacian of a high-frequency sine meets the stencil error bound") {
    Tape t(nullptr);
    double w = 20.0 * pi;
    BatchFn f = fn_of_x([w](const std::vector<double>& p) { return std::sin(w * p[0]); });
    Rng rng(17);
    int n = 200;
    Tensor X(n, 1);
    for (int r = 0; r < n; ++r) X(r, 0) = rng.uniform(-1.0, 1.0);
    Tensor lap = t.val(fd_laplacian_batch(t, f, X, 1e-4));
    for (int r = 0; r < n; ++r) {
        double truth = -w * w * std::sin(w * X(r, 0));
        if (std::abs(truth) < 1.0) continue;  // relative error blows up near zeros
        CHECK(std::abs(lap(r, 0) - truth) / std::abs(truth) < 1e-3);
    }
}

TEST_CASE("laplacian sums the axis contributions in higher dimensions") {
    // u = x^2 + 2 y^2 + 3 z^2 has laplacian 12 everywhere.
    Tape t(nullptr);
    BatchFn f = fn_of_x([](const std::vector<double>& p) {
        return p[0] * p[0] + 2.0 * p[1] * p[1] + 3.0 * p[2] * p[2];
    });
    Tensor X(4, 3);
    Rng rng(3);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 3; ++c) X(r, c) = rng.uniform(-1.0, 1.0);
    Tensor lap = t.val(fd_laplacian_batch(t, f, X, 1e-3));
    for (int r = 0; r < 4; ++r) CHECK(std::abs(lap(r, 0) - 12.0) < 1e-6);
}

TEST_CASE("gradient of a linear map recovers the coefficients") {
    Tape t(nullptr);
    std::vector<double> a = {1.5, -2.0, 0.25};
    BatchFn f = fn_of_x([a](const std::vector<double>& p) {
        return a[0] * p[0] + a[1] * p[1] + a[2] * p[2];
    });
    Tensor X(3, 3);
    Rng rng(9);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) X(r, c) = rng.uniform(-1.0, 1.0);
    Tensor g = t.val(fd_gradient_batch(t, f, X, 1e-4));
    REQUIRE(g.rows() == 3);
    REQUIRE(g.cols() == 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(std::abs(g(r, c) - a[size_t(c)]) < 1e-10);
}

TEST_CASE("gradient of an oscillatory function matches the chain rule") {
    Tape t(nullptr);
    double mu = 15.0;
    BatchFn f = fn_of_x([mu](const std::vector<double>& p) {
        return std::sin(mu * p[0] * p[0]) + p[1];
    });
    Tensor X(5, 2);
    Rng rng(21);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 2; ++c) X(r, c) = rng.uniform(0.2, 0.9);
    Tensor g = t.val(fd_gradient_batch(t, f, X, 1e-5));
    for (int r = 0; r < 5; ++r) {
        double x = X(r, 0);
        double truth = 2.0 * mu * x * std::cos(mu * x * x);
        CHECK(std::abs(g(r, 0) - truth) / std::abs(truth) < 1e-5);
        CHECK(std::abs(g(r, 1) - 1.0) < 1e-9);
    }
}

TEST_CASE("single-point helpers agree with the batch forms") {
    Tape t(nullptr);
    BatchFn sq = fn_of_x([](const std::vector<double>& p) { return p[0] * p[0] + p[1]; });
    Var lap = fd_laplacian(t, sq, {0.3, -0.2}, 1e-3);
    CHECK(std::abs(t.val(lap).item() - 2.0) < 1e-7);
    std::vector<double> g = fd_gradient_vec(t, sq, {0.3, -0.2}, 1e-4);
    REQUIRE(g.size() == 2);
    CHECK(std::abs(g[0] - 0.6) < 1e-9);
    CHECK(std::abs(g[1] - 1.0) < 1e-9);
}

TEST_CASE("stencil operators reject non-positive steps") {
    Tape t(nullptr);
    BatchFn f = fn_of_x([](const std::vector<double>& p) { return p[0]; });
    Tensor X = col_from({0.5});
    CHECK_THROWS_AS(fd_laplacian_batch(t, f, X, 0.0), ContractError);
    CHECK_THROWS_AS(fd_gradient_batch(t, f, X, -1e-3), ContractError);
}

TEST_CASE("parameter gradients flow through the recorded stencil") {
    ParamStore store;
    DenseNet net = init_dense_net(1, 1, 6, 2, store, Rng(31));
    Tensor X = col_from({-0.4, 0.1, 0.7});
    auto loss = [&](Tape& t) {
        BatchFn u = [&](Tape& tt, const Tensor& P) { return dense_net_forward(tt, net, P); };
        return t.mean_all(t.square(fd_laplacian_batch(t, u, X, 0.25)));
    };
    CHECK(fd_gradient_check(loss, store, 1e-6) < 1e-6);
}

TEST_CASE("interior box samples stay inside the cube") {
    Rng rng(5);
    Domain dom{DomainKind::kBox, 2};
    Tensor X = sample_interior(dom, 500, rng);
    REQUIRE(X.rows() == 500);
    REQUIRE(X.cols() == 2);
    for (int r = 0; r < X.rows(); ++r)
        for (int c = 0; c < X.cols(); ++c) {
            CHECK(X(r, c) >= -1.0);
            CHECK(X(r, c) <= 1.0);
        }
}

TEST_CASE("interior ball samples have the uniform-ball radial moment") {
    // E[|x|^2] for the uniform unit ball in d dimensions is d/(d+2).
    Rng rng(6);
    for (int d : {1, 2, 3}) {
        Domain dom{DomainKind::kBall, d};
        int n = 40000;
        Tensor X = sample_interior(dom, n, rng);
        double acc = 0.0;
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += X(r, c) * X(r, c);
            CHECK(s <= 1.0);
            acc += s;
        }
        double want = double(d) / double(d + 2);
        CHECK(std::abs(acc / n - want) < 0.01);
    }
}

TEST_CASE("box boundary samples cover every face with pinned coordinates") {
    Rng rng(7);
    Domain dom{DomainKind::kBox, 2};
    int n = 50;
    Tensor X = sample_boundary(dom, n, rng);
    REQUIRE(X.rows() == 2 * 2 * n);
    int row = 0;
    for (int axis = 0; axis < 2; ++axis)
        for (double side : {-1.0, 1.0})
            for (int i = 0; i < n; ++i, ++row) {
                CHECK(X(row, axis) == side);
                int other = 1 - axis;
                CHECK(X(row, other) >= -1.0);
                CHECK(X(row, other) <= 1.0);
            }
}

TEST_CASE("1d box boundary is exactly the two endpoints") {
    Rng rng(8);
    Domain dom{DomainKind::kBox, 1};
    Tensor X = sample_boundary(dom, 3, rng);
    REQUIRE(X.rows() == 6);
    for (int r = 0; r < 3; ++r) CHECK(X(r, 0) == -1.0);
    for (int r = 3; r < 6; ++r) CHECK(X(r, 0) == 1.0);
}

TEST_CASE("sphere boundary samples sit on the unit sphere") {
    Rng rng(9);
    Domain dom{DomainKind::kBall, 3};
    Tensor X = sample_boundary(dom, 200, rng);
    REQUIRE(X.rows() == 200);
    for (int r = 0; r < 200; ++r) {
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += X(r, c) * X(r, c);
        CHECK(std::abs(std::sqrt(s) - 1.0) < 1e-12);
    }
}

TEST_CASE("samplers are deterministic in the generator state") {
    Domain dom{DomainKind::kBall, 3};
    Rng a(11), b(11);
    Tensor Xa = sample_interior(dom, 64, a);
    Tensor Xb = sample_interior(dom, 64, b);
    CHECK(Xa == Xb);
    Tensor Ba = sample_boundary(dom, 32, a);
    Tensor Bb = sample_boundary(dom, 32, b);
    CHECK(Ba == Bb);
}

TEST_CASE("samplers validate their inputs") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_interior(Domain{DomainKind::kBox, 0}, 4, rng), ConfigError);
    CHECK_THROWS_AS(sample_interior(Domain{DomainKind::kBox, 4}, 4, rng), ConfigError);
    CHECK_THROWS_AS(sample_interior(Domain{DomainKind::kBox, 1}, 0, rng), ContractError);
    CHECK_THROWS_AS(sample_boundary(Domain{DomainKind::kBall, 2}, 0, rng), ContractError);
}

TEST_CASE("ball-union geometry has surface centers and bounded radii") {
    BallUnionDomain dom = build_pb_domain(123);
    REQUIRE(dom.centers.rows() == 20);
    REQUIRE(dom.radii.cols() == 20);
    for (int i = 0; i < 20; ++i) {
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += dom.centers(i, c) * dom.centers(i, c);
        CHECK(std::abs(std::sqrt(s) - 0.5) < 1e-14);
        CHECK(dom.radii(0, i) >= 0.1);
        CHECK(dom.radii(0, i) <= 0.2);
    }
    BallUnionDomain again = build_pb_domain(123);
    CHECK(again.centers == dom.centers);
    CHECK(again.radii == dom.radii);
    BallUnionDomain other = build_pb_domain(124);
    CHECK_FALSE(other.centers == dom.centers);
}

TEST_CASE("region membership splits the ball union from its complement") {
    BallUnionDomain dom = build_pb_domain(42);
    CHECK(in_omega1(dom, {0.0, 0.0, 0.0}));
    CHECK(in_omega1(dom, {0.49, 0.0, 0.0}));
    // Surface bumps reach at most 0.5 + 0.2 from the origin.
    CHECK_FALSE(in_omega1(dom, {0.99, 0.0, 0.0}));
    CHECK_FALSE(in_omega1(dom, {0.0, 0.0, -0.95}));
    // Every bump center lies in region 1 by construction.
    for (int i = 0; i < 20; ++i)
        CHECK(in_omega1(dom, {dom.centers(i, 0), dom.centers(i, 1), dom.centers(i, 2)}));
}

TEST_CASE("collocation residual matches a hand-computed quadratic case") {
    // u = x^2, kappa = 1, f = 0: the residual is -2 + x^2 at every point.
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>&) { return 0.0; };
    prob.kappa = [](const std::vector<double>&) { return 1.0; };
    prob.gamma = 0.5;
    prob.fd_step = 1e-2;
    BatchFn u = fn_of_x([](const std::vector<double>& p) { return p[0] * p[0]; });
    Tensor Xr = col_from({-0.5, 0.2, 0.8});
    Tensor Xb = col_from({-1.0, 1.0});
    Tape t(nullptr);
    double got = t.val(pinn_loss(t, prob, u, Xr, Xb)).item();
    double interior = 0.0;
    for (int r = 0; r < 3; ++r) {
        double x = Xr(r, 0);
        double resid = -2.0 + x * x;
        interior += resid * resid;
    }
    interior /= 3.0;
    double boundary = 0.5 * (1.0 + 1.0) / 2.0;  // u(+-1) = 1 against g = 0
    CHECK(std::abs(got - (interior + boundary)) < 1e-9);
}

TEST_CASE("zero function with zero data gives exactly zero loss") {
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>&) { return 0.0; };
    prob.gamma = 1.0;
    BatchFn u = fn_of_x([](const std::vector<double>&) { return 0.0; });
    Tensor Xr = col_from({-0.3, 0.6});
    Tensor Xb = col_from({-1.0, 1.0});
    Tape t(nullptr);
    CHECK(t.val(pinn_loss(t, prob, u, Xr, Xb)).item() == 0.0);
    CHECK(t.val(ritz_loss(t, prob, u, Xr, Xb)).item() == 0.0);
}

TEST_CASE("zero boundary weight drops the boundary term") {
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>&) { return 1.0; };
    prob.fd_step = 1e-3;
    BatchFn u = fn_of_x([](const std::vector<double>& p) { return p[0]; });  // u(+-1) != 0
    Tensor Xr = col_from({0.1, -0.4});
    Tensor Xb = col_from({-1.0, 1.0});
    Tape t(nullptr);
    prob.gamma = 0.0;
    double base = t.val(pinn_loss(t, prob, u, Xr, Xb)).item();
    prob.gamma = 2.0;
    double with_b = t.val(pinn_loss(t, prob, u, Xr, Xb)).item();
    CHECK(std::abs(base - 1.0) < 1e-8);             // residual is -f = -1 everywhere
    CHECK(std::abs(with_b - base - 2.0) < 1e-8);    // adds gamma * mean(1, 1)
}

TEST_CASE("collocation loss is invariant under point reordering") {
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>& p) { return std::sin(3.0 * p[0]); };
    prob.gamma = 1.0;
    BatchFn u = fn_of_x([](const std::vector<double>& p) { return std::cos(2.0 * p[0]); });
    Tensor Xr = col_from({-0.8, -0.1, 0.3, 0.9});
    Tensor Xp = col_from({0.9, -0.1, -0.8, 0.3});
    Tensor Xb = col_from({-1.0, 1.0});
    Tape t(nullptr);
    double a = t.val(pinn_loss(t, prob, u, Xr, Xb)).item();
    double b = t.val(pinn_loss(t, prob, u, Xp, Xb)).item();
    CHECK(std::abs(a - b) < 1e-14);
}

TEST_CASE("exact five-mode solution hits the stencil truncation floor") {
    // With the exact solution plugged in, the only interior residual is the
    // centered-stencil truncation h^2/12 * u'''' + O(h^4), so the loss must
    // land below (h^2/12 * sum_i a_i w_i^4)^2 and well above zero.
    double nu = 30.0, h = 1e-4;
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [nu](const std::vector<double>& p) { return poisson1d_source(p[0], nu); };
    prob.boundary_data = [nu](const std::vector<double>& p) { return poisson1d_exact(p[0], nu); };
    prob.gamma = 1.0;
    prob.fd_step = h;
    BatchFn u = fn_of_x([nu](const std::vector<double>& p) { return poisson1d_exact(p[0], nu); });
    Rng rng(77);
    int n = 512;
    Tensor Xr(n, 1);
    for (int r = 0; r < n; ++r) Xr(r, 0) = rng.uniform(-1.0, 1.0);
    Tensor Xb = col_from({-1.0, 1.0});
    Tape t(nullptr);
    double loss = t.val(pinn_loss(t, prob, u, Xr, Xb)).item();
    const double amps[5] = {1.0, 0.2, 0.4, 0.6, 1.0};
    const double freqs[5] = {0.1 * pi, pi, 10.0 * pi, 20.0 * pi, 30.0 * pi};
    double fourth = 0.0;
    for (int i = 0; i < 5; ++i) fourth += amps[i] * std::pow(freqs[i], 4.0);
    double bound = std::pow(h * h / 12.0 * fourth, 2.0);
    CHECK(loss < bound * 1.02);
    CHECK(loss > bound / 50.0);
}

TEST_CASE("variational energy of a box sine matches the exact integral") {
    // u = sin(pi x), f = pi^2 sin(pi x) on [-1,1]: the energy is
    // 0.5 * int pi^2 cos^2 - int pi^2 sin^2 = -pi^2 / 2.
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>& p) { return pi * pi * std::sin(pi * p[0]); };
    prob.gamma = 1.0;
    prob.fd_step = 1e-4;
    BatchFn u = fn_of_x([](const std::vector<double>& p) { return std::sin(pi * p[0]); });
    int n = 4096;
    Tensor Xr(n, 1);
    for (int r = 0; r < n; ++r) Xr(r, 0) = -1.0 + 2.0 * (r + 0.5) / n;  // midpoint grid
    Tensor Xb = col_from({-1.0, 1.0});
    Tape t(nullptr);
    double got = t.val(ritz_loss(t, prob, u, Xr, Xb)).item();
    CHECK(std::abs(got - (-pi * pi / 2.0)) < 1e-3);
}

TEST_CASE("variational measure factors are exact on constant functions") {
    // u = c, kappa = 1, f = 0, g = 0: the energy is |domain| c^2/2 plus
    // gamma |boundary| c^2, independent of where the samples fall.
    double c = 0.75, gamma = 3.0;
    Rng rng(13);
    for (DomainKind kind : {DomainKind::kBox, DomainKind::kBall})
        for (int d : {1, 2, 3}) {
            Domain dom{kind, d};
            PdeProblem prob;
            prob.domain = dom;
            prob.source = [](const std::vector<double>&) { return 0.0; };
            prob.kappa = [](const std::vector<double>&) { return 1.0; };
            prob.gamma = gamma;
            BatchFn u = fn_of_x([c](const std::vector<double>&) { return c; });
            Tensor Xr = sample_interior(dom, 16, rng);
            Tensor Xb = sample_boundary(dom, 8, rng);
            Tape t(nullptr);
            double got = t.val(ritz_loss(t, prob, u, Xr, Xb)).item();
            double want = domain_volume(dom) * c * c / 2.0 + gamma * boundary_measure(dom) * c * c;
            CHECK(std::abs(got - want) < 1e-10);
        }
}

TEST_CASE("measure factors take their geometric values") {
    CHECK(domain_volume({DomainKind::kBox, 3}) == 8.0);
    CHECK(boundary_measure({DomainKind::kBox, 3}) == 24.0);
    CHECK(domain_volume({DomainKind::kBox, 1}) == 2.0);
    CHECK(boundary_measure({DomainKind::kBox, 1}) == 2.0);
    CHECK(std::abs(domain_volume({DomainKind::kBall, 2}) - pi) < 1e-15);
    CHECK(std::abs(boundary_measure({DomainKind::kBall, 3}) - 4.0 * pi) < 1e-15);
}

TEST_CASE("reaction term enters the operator pointwise") {
    // u = c constant: lap vanishes exactly, so N[u] = kappa(x) * c.
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 2};
    prob.source = [](const std::vector<double>&) { return 0.0; };
    prob.kappa = [](const std::vector<double>& p) { return p[0] * p[0] + 2.0; };
    BatchFn u = fn_of_x([](const std::vector<double>&) { return -1.25; });
    Tensor X(3, 2, {0.1, 0.2, -0.6, 0.4, 0.9, -0.9});
    Tape t(nullptr);
    Tensor op = t.val(apply_operator(t, prob, u, X));
    for (int r = 0; r < 3; ++r) {
        double want = (X(r, 0) * X(r, 0) + 2.0) * -1.25;
        CHECK(std::abs(op(r, 0) - want) < 1e-12);
    }
}

TEST_CASE("optimal mixing factor cancels a scaled component exactly") {
    // u_h = -c0 * u_l and f = 0 make the mixed residual vanish at alpha = c0.
    double c0 = 1.7;
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>&) { return 0.0; };
    prob.gamma = 0.0;
    prob.fd_step = 1e-3;
    BatchFn ul = fn_of_x([](const std::vector<double>& p) { return std::sin(pi * p[0]); });
    BatchFn uh = fn_of_x([c0](const std::vector<double>& p) { return -c0 * std::sin(pi * p[0]); });
    Tensor Xr = col_from({-0.6, -0.2, 0.3, 0.7});
    Tensor Xb = col_from({-1.0, 1.0});
    ParamStore store;
    double alpha = alpha_optimal(prob, uh, ul, store, Xr, Xb);
    CHECK(std::abs(alpha - c0) < 1e-10);
}

TEST_CASE("orthogonal residuals give a zero mixing factor") {
    // Even residual of u_h against the odd operator image of u_l = x^3 on a
    // symmetric grid: the correlation cancels pairwise.
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>&) { return 1.0; };
    prob.gamma = 0.0;
    prob.fd_step = 1e-2;
    BatchFn uh = fn_of_x([](const std::vector<double>&) { return 0.0; });
    BatchFn ul = fn_of_x([](const std::vector<double>& p) { return p[0] * p[0] * p[0]; });
    Tensor Xr = col_from({-0.8, -0.5, -0.2, 0.2, 0.5, 0.8});
    Tensor Xb = col_from({-1.0, 1.0});
    ParamStore store;
    double alpha = alpha_optimal(prob, uh, ul, store, Xr, Xb);
    CHECK(std::abs(alpha) < 1e-9);
}

TEST_CASE("degenerate low-frequency component is rejected") {
    PdeProblem prob;
    prob.domain = {DomainKind::kBox, 1};
    prob.source = [](const std::vector<double>&) { return 1.0; };
    prob.gamma = 1.0;
    BatchFn uh = fn_of_x([](const std::vector<double>& p) { return p[0] * p[0]; });
    BatchFn ul = fn_of_x([](const std::vector<double>&) { return 0.0; });
    Tensor Xr = col_from({0.1, 0.5});
    Tensor Xb = col_from({-1.0, 1.0});
    ParamStore store;
    CHECK_THROWS_AS(alpha_optimal(prob, uh, ul, store, Xr, Xb), NumericError);
}

namespace {

// Shared fixture for the mixed-objective cases: two small dense nets over a
// 1d problem with a sine forcing.
struct MixedFixture {
    ParamStore store;
    DenseNet nh, nl;
    PdeProblem prob;
    Tensor Xr{6, 1};
    Tensor Xb{2, 1};
    BatchFn uh, ul;

    explicit MixedFixture(double gamma) {
        nh = init_dense_net(1, 1, 8, 2, store, Rng(51), "high.");
        nl = init_dense_net(1, 1, 6, 2, store, Rng(52), "low.");
        prob.domain = {DomainKind::kBox, 1};
        prob.source = [](const std::vector<double>& p) { return std::sin(2.0 * p[0]); };
        prob.gamma = gamma;
        prob.fd_step = 0.25;
        Rng rng(53);
        for (int r = 0; r < 6; ++r) Xr(r, 0) = rng.uniform(-1.0, 1.0);
        Xb(0, 0) = -1.0;
        Xb(1, 0) = 1.0;
        uh = [this](Tape& t, const Tensor& X) { return dense_net_forward(t, nh, X); };
        ul = [this](Tape& t, const Tensor& X) { return dense_net_forward(t, nl, X); };
    }
};

}  // namespace

TEST_CASE("mixed objective at alpha zero reduces to the single-network loss") {
    MixedFixture fx(0.8);
    MixedConfig cfg;
    cfg.strategy = AlphaStrategy::kFixed;
    cfg.fixed_value = 0.0;
    Tape t(&fx.store);
    MixedLoss mixed = mixed_pinn_loss(t, fx.prob, fx.uh, fx.ul, cfg, fx.Xr, fx.Xb);
    double plain = t.val(pinn_loss(t, fx.prob, fx.uh, fx.Xr, fx.Xb)).item();
    CHECK(std::abs(t.val(mixed.loss).item() - plain) < 1e-15);
    CHECK(mixed.alpha == 0.0);
}

TEST_CASE("fixed mixing matches a hand-assembled objective") {
    MixedFixture fx(0.8);
    double alpha = 0.6;
    MixedConfig cfg;
    cfg.strategy = AlphaStrategy::kFixed;
    cfg.fixed_value = alpha;
    Tape t(&fx.store);
    MixedLoss mixed = mixed_pinn_loss(t, fx.prob, fx.uh, fx.ul, cfg, fx.Xr, fx.Xb);

    Tensor oph = t.val(apply_operator(t, fx.prob, fx.uh, fx.Xr));
    Tensor opl = t.val(apply_operator(t, fx.prob, fx.ul, fx.Xr));
    Tensor uhb = t.val(fx.uh(t, fx.Xb));
    Tensor ulb = t.val(fx.ul(t, fx.Xb));
    double interior = 0.0;
    for (int r = 0; r < fx.Xr.rows(); ++r) {
        std::vector<double> p = {fx.Xr(r, 0)};
        double resid = oph(r, 0) + alpha * opl(r, 0) - fx.prob.source(p);
        interior += resid * resid;
    }
    interior /= fx.Xr.rows();
    double boundary = 0.0;
    for (int r = 0; r < fx.Xb.rows(); ++r)
        boundary += uhb(r, 0) * uhb(r, 0) + alpha * alpha * ulb(r, 0) * ulb(r, 0);
    boundary /= fx.Xb.rows();
    CHECK(std::abs(t.val(mixed.loss).item() - (interior + 0.8 * boundary)) < 1e-12);
}

TEST_CASE("learnable mixing evaluates like the fixed strategy at its value") {
    MixedFixture fx(0.8);
    MixedConfig fixed_cfg, learn_cfg;
    fixed_cfg.strategy = AlphaStrategy::kFixed;
    fixed_cfg.fixed_value = 0.7;
    learn_cfg.strategy = AlphaStrategy::kLearnable;
    register_alpha_param(fx.store, learn_cfg, 0.7);
    Tape t(&fx.store);
    double a = t.val(mixed_pinn_loss(t, fx.prob, fx.uh, fx.ul, fixed_cfg, fx.Xr, fx.Xb).loss).item();
    double b = t.val(mixed_pinn_loss(t, fx.prob, fx.uh, fx.ul, learn_cfg, fx.Xr, fx.Xb).loss).item();
    CHECK(std::abs(a - b) < 1e-15);
}

TEST_CASE("learnable mixing passes the gradient oracle across all parameters") {
    MixedFixture fx(0.8);
    MixedConfig cfg;
    cfg.strategy = AlphaStrategy::kLearnable;
    register_alpha_param(fx.store, cfg, 0.4);
    auto loss = [&](Tape& t) {
        return mixed_pinn_loss(t, fx.prob, fx.uh, fx.ul, cfg, fx.Xr, fx.Xb).loss;
    };
    CHECK(fd_gradient_check(loss, fx.store, 1e-6) < 1e-6);
}

TEST_CASE("closed-form mixing is a stationary point of the released objective") {
    // At gamma = 0 the closed form minimizes the same objective the
    // learnable strategy sees, so the alpha-gradient vanishes there and
    // neighboring alphas only increase the loss.
    MixedFixture fx(0.0);
    double astar = alpha_optimal(fx.prob, fx.uh, fx.ul, fx.store, fx.Xr, fx.Xb);

    MixedConfig learn_cfg;
    learn_cfg.strategy = AlphaStrategy::kLearnable;
    register_alpha_param(fx.store, learn_cfg, astar);
    Tape t(&fx.store);
    MixedLoss at_star = mixed_pinn_loss(t, fx.prob, fx.uh, fx.ul, learn_cfg, fx.Xr, fx.Xb);
    GradMap g = t.backward(at_star.loss);
    CHECK(std::abs(g.at("mix.alpha").item()) < 1e-8);

    MixedConfig probe;
    probe.strategy = AlphaStrategy::kFixed;
    double base = 0.0;
    for (double d : {0.0, -1e-3, 1e-3, -1e-4, 1e-4}) {
        probe.fixed_value = astar + d;
        Tape tp(&fx.store);
        double l = tp.val(mixed_pinn_loss(tp, fx.prob, fx.uh, fx.ul, probe, fx.Xr, fx.Xb).loss).item();
        if (d == 0.0)
            base = l;
        else
            CHECK(l >= base);
    }
}

TEST_CASE("closed-form mixing minimizes the full penalized objective") {
    // With gamma > 0 the closed form is the exact minimizer of the fixed
    // objective including the alpha^2 boundary mass.
    MixedFixture fx(2.5);
    double astar = alpha_optimal(fx.prob, fx.uh, fx.ul, fx.store, fx.Xr, fx.Xb);
    MixedConfig probe;
    probe.strategy = AlphaStrategy::kFixed;
    double base = 0.0;
    for (double d : {0.0, -1e-2, 1e-2, -1e-3, 1e-3}) {
        probe.fixed_value = astar + d;
        Tape tp(&fx.store);
        double l = tp.val(mixed_pinn_loss(tp, fx.prob, fx.uh, fx.ul, probe, fx.Xr, fx.Xb).loss).item();
        if (d == 0.0)
            base = l;
        else
            CHECK(l > base);
    }
}

TEST_CASE("frozen mixing strategy reports the closed-form value and still trains") {
    MixedFixture fx(1.5);
    MixedConfig cfg;
    cfg.strategy = AlphaStrategy::kOptimal;
    double astar = alpha_optimal(fx.prob, fx.uh, fx.ul, fx.store, fx.Xr, fx.Xb);
    Tape t(&fx.store);
    MixedLoss mixed = mixed_pinn_loss(t, fx.prob, fx.uh, fx.ul, cfg, fx.Xr, fx.Xb);
    CHECK(mixed.alpha == doctest::Approx(astar).epsilon(1e-14));
    GradMap g = t.backward(mixed.loss);
    CHECK(g.count("high.l0.w") == 1);
    CHECK(g.count("low.l0.w") == 1);
    CHECK(g.count("mix.alpha") == 0);
}

TEST_CASE("mixture prediction combines both networks linearly") {
    MixedFixture fx(1.0);
    double alpha = -0.35;
    Tensor X = col_from({-0.9, 0.0, 0.5});
    Tensor mix = mixed_eval(fx.store, fx.uh, fx.ul, alpha, X);
    Tape t(&fx.store);
    Tensor yh = t.val(fx.uh(t, X));
    Tensor yl = t.val(fx.ul(t, X));
    for (int r = 0; r < 3; ++r)
        CHECK(std::abs(mix(r, 0) - (yh(r, 0) + alpha * yl(r, 0))) < 1e-15);
}

TEST_CASE("plain coordinate network: zero weights give the output bias") {
    ParamStore store;
    DenseNet net = init_dense_net(2, 1, 5, 2, store, Rng(61), "mlp.");
    for (int l = 0; l < 2; ++l) {
        Tensor& w = store.get("mlp.l" + std::to_string(l) + ".w");
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = 0.0;
    }
    Tensor& wout = store.get("mlp.wout");
    for (int r = 0; r < wout.rows(); ++r) wout(r, 0) = 0.0;
    store.get("mlp.bout")(0, 0) = 2.5;
    Tensor X(3, 2, {0.1, 0.2, -0.5, 0.6, 0.9, -0.9});
    Tensor y = dense_net_eval(store, net, X);
    for (int r = 0; r < 3; ++r) CHECK(y(r, 0) == 2.5);
}

TEST_CASE("plain coordinate network passes the gradient oracle") {
    ParamStore store;
    DenseNet net = init_dense_net(2, 1, 6, 3, store, Rng(62));
    Tensor X(4, 2);
    Rng rng(63);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 2; ++c) X(r, c) = rng.uniform(-1.0, 1.0);
    auto loss = [&](Tape& t) { return t.mean_all(t.square(dense_net_forward(t, net, X))); };
    CHECK(fd_gradient_check(loss, store, 1e-6) < 1e-6);
}

TEST_CASE("plain coordinate network rejects mismatched input width") {
    ParamStore store;
    DenseNet net = init_dense_net(2, 1, 4, 1, store, Rng(64));
    Tensor X(3, 3);
    CHECK_THROWS_AS(dense_net_eval(store, net, X), ShapeError);
}

TEST_CASE("problem validation rejects bad configurations") {
    BatchFn u = fn_of_x([](const std::vector<double>&) { return 0.0; });
    Tensor Xr = col_from({0.0});
    Tensor Xb = col_from({-1.0, 1.0});
    Tape t(nullptr);
    PdeProblem no_source;
    no_source.domain = {DomainKind::kBox, 1};
    CHECK_THROWS_AS(pinn_loss(t, no_source, u, Xr, Xb), ConfigError);
    PdeProblem bad_gamma;
    bad_gamma.domain = {DomainKind::kBox, 1};
    bad_gamma.source = [](const std::vector<double>&) { return 0.0; };
    bad_gamma.gamma = -1.0;
    CHECK_THROWS_AS(pinn_loss(t, bad_gamma, u, Xr, Xb), ConfigError);
    PdeProblem bad_step;
    bad_step.domain = {DomainKind::kBox, 1};
    bad_step.source = [](const std::vector<double>&) { return 0.0; };
    bad_step.fd_step = 0.0;
    CHECK_THROWS_AS(ritz_loss(t, bad_step, u, Xr, Xb), ConfigError);
}

TEST_SUITE_END();
