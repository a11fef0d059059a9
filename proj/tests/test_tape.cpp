#include <doctest.h>

#include <cmath>

#include "core/rng.hpp"
#include "core/tape.hpp"

using namespace sca;

namespace {

Tensor random_tensor(Rng& rng, int rows, int cols, double scale = 1.0) {
    Tensor t(rows, cols);
    for (size_t i = 0; i < t.size(); ++i) t.at(i) = scale * rng.gaussian();
    return t;
}

} // namespace

TEST_SUITE("tape") {

TEST_CASE("softmax of a zero row is uniform") {
    Tape tape;
    Var x = tape.constant(Tensor(1, 3));
    Var y = tape.softmax(x);
    for (int c = 0; c < 3; ++c) CHECK(tape.val(y)(0, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("cos of a zero tensor is all ones") {
    Tape tape;
    Var x = tape.constant(Tensor(2, 5));
    Var y = tape.cos(x);
    for (size_t i = 0; i < tape.val(y).size(); ++i) CHECK(tape.val(y).at(i) == 1.0);
}

TEST_CASE("softmax rows sum to one even for large logits") {
    Tape tape;
    Var x = tape.constant(Tensor(1, 4, {1000.0, 999.0, 998.0, -1000.0}));
    Var y = tape.softmax(x);
    double s = 0.0;
    for (int c = 0; c < 4; ++c) s += tape.val(y)(0, c);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(tape.val(y).all_finite());
}

TEST_CASE("square gradient: f(w)=w^2 at w=3 gives 6") {
    ParamStore params;
    params.add("w", Tensor::scalar(3.0));
    Tape tape(&params);
    Var loss = tape.square(tape.param("w"));
    GradMap g = tape.backward(loss);
    CHECK(g.at("w").item() == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("sum of softmax has zero gradient") {
    ParamStore params;
    params.add("w", Tensor(1, 5, {0.3, -1.2, 2.0, 0.0, 0.7}));
    Tape tape(&params);
    Var loss = tape.sum_all(tape.softmax(tape.param("w")));
    CHECK(tape.val(loss).item() == doctest::Approx(1.0).epsilon(1e-14));
    GradMap g = tape.backward(loss);
    for (size_t i = 0; i < g.at("w").size(); ++i) CHECK(std::abs(g.at("w").at(i)) < 1e-14);
}

TEST_CASE("backward requires a scalar output") {
    ParamStore params;
    params.add("w", Tensor(2, 2, {1, 2, 3, 4}));
    Tape tape(&params);
    Var y = tape.square(tape.param("w"));
    CHECK_THROWS_AS(tape.backward(y), ContractError);
}

TEST_CASE("non-trainable leaves get no gradient entry") {
    ParamStore params;
    params.add("w", Tensor::scalar(2.0), true);
    params.add("frozen", Tensor::scalar(5.0), false);
    Tape tape(&params);
    Var loss = tape.mul(tape.param("w"), tape.param("frozen"));
    GradMap g = tape.backward(loss);
    CHECK(g.count("w") == 1);
    CHECK(g.count("frozen") == 0);
    CHECK(g.at("w").item() == doctest::Approx(5.0));
}

TEST_CASE("every primitive matches central finite differences") {
    Rng rng(2024);
    ParamStore params;
    params.add("a", random_tensor(rng, 3, 4, 0.5));
    params.add("b", random_tensor(rng, 4, 3, 0.5));
    params.add("c", random_tensor(rng, 3, 3, 0.5));

    auto composite = [](Tape& t) {
        Var a = t.param("a");
        Var b = t.param("b");
        Var c = t.param("c");
        Var m = t.matmul(a, b);                         // 3x3
        Var s = t.add(m, c);
        Var e = t.mul(t.tanh(s), t.cos(c));
        Var sm = t.softmax(t.scale(e, 0.7));
        Var mixed = t.add(sm, t.softplus(t.sin(s)));
        Var top = t.concat_cols(mixed, t.transpose(t.slice_rows(t.exp(t.scale(c, 0.1)), 0, 3)));
        Var sq = t.square(t.slice_cols(top, 1, 5));
        Var rooted = t.sqrt(t.add(sq, t.constant(Tensor::full(3, 4, 0.5))));
        Var ratio = t.div(rooted, t.constant(Tensor::full(3, 4, 2.0)));
        Var red = t.sum_cols(t.reshape(ratio, 4, 3));          // 4x1
        Var stacked = t.transpose(t.concat_rows(red, red));    // 1x8
        return t.add(t.mean_all(stacked), t.scale(t.mean_all(t.mean_cols(ratio)), 0.5));
    };

    double err = fd_gradient_check(composite, params, 1e-6);
    CHECK(err < 1e-6);
}

TEST_CASE("quadratic loss passes the finite-difference check to 1e-9") {
    ParamStore params;
    params.add("w", Tensor(1, 4, {1.0, -2.0, 0.5, 3.0}));
    auto quad = [](Tape& t) { return t.sum_all(t.square(t.param("w"))); };
    CHECK(fd_gradient_check(quad, params, 1e-3) < 1e-9);
}

TEST_CASE("linear loss passes the finite-difference check to 1e-12") {
    ParamStore params;
    params.add("w", Tensor(1, 3, {0.25, -1.5, 2.0}));
    auto lin = [](Tape& t) {
        return t.sum_all(t.mul(t.param("w"), t.constant(Tensor(1, 3, {2.0, 4.0, -1.0}))));
    };
    CHECK(fd_gradient_check(lin, params, 1e-2) < 1e-12);
}

TEST_CASE("backward is linear in the loss") {
    Rng rng(7);
    ParamStore params;
    params.add("w", random_tensor(rng, 2, 3));

    auto build_f = [](Tape& t) { return t.mean_all(t.square(t.param("w"))); };
    auto build_g = [](Tape& t) { return t.sum_all(t.sin(t.param("w"))); };
    const double a = 1.7, b = -0.4;

    Tape tf(&params);
    GradMap gf = tf.backward(build_f(tf));
    Tape tg(&params);
    GradMap gg = tg.backward(build_g(tg));
    Tape tc(&params);
    Var combined = tc.add(tc.scale(build_f(tc), a), tc.scale(build_g(tc), b));
    GradMap gc = tc.backward(combined);

    for (size_t i = 0; i < gc.at("w").size(); ++i) {
        double expect = a * gf.at("w").at(i) + b * gg.at("w").at(i);
        CHECK(gc.at("w").at(i) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("forward evaluation is deterministic") {
    Rng rng(42);
    ParamStore params;
    params.add("w", random_tensor(rng, 4, 4));
    auto run = [&params]() {
        Tape t(&params);
        Var y = t.mean_all(t.softmax(t.matmul(t.param("w"), t.param("w"))));
        return t.val(y).item();
    };
    double first = run();
    for (int i = 0; i < 5; ++i) CHECK(run() == first);
}

TEST_CASE("tape reset allows a fresh forward pass") {
    ParamStore params;
    params.add("w", Tensor::scalar(2.0));
    Tape tape(&params);
    Var loss = tape.square(tape.param("w"));
    GradMap g1 = tape.backward(loss);
    tape.reset();
    CHECK(tape.node_count() == 0);
    params.get("w") = Tensor::scalar(4.0);
    Var loss2 = tape.square(tape.param("w"));
    GradMap g2 = tape.backward(loss2);
    CHECK(g2.at("w").item() == doctest::Approx(8.0));
    CHECK(g1.at("w").item() == doctest::Approx(4.0));
}

TEST_CASE("shape errors name the op") {
    Tape tape;
    Var a = tape.constant(Tensor(2, 3));
    Var b = tape.constant(Tensor(3, 2));
    CHECK_THROWS_AS(tape.add(a, b), ShapeError);
    CHECK_THROWS_AS(tape.mul(a, b), ShapeError);
    CHECK_THROWS_AS(tape.concat_rows(a, tape.constant(Tensor(2, 4))), ShapeError);
    CHECK_THROWS_AS(tape.slice_rows(a, 0, 5), ShapeError);
    CHECK_THROWS_AS(tape.reshape(a, 4, 2), ShapeError);
    try {
        tape.matmul(a, tape.constant(Tensor(2, 2)));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("matmul") != std::string::npos);
    }
}

TEST_CASE("finite checking raises on NaN results when enabled") {
    Tape tape;
    tape.set_check_finite(true);
    Var x = tape.constant(Tensor(1, 2, {-1.0, 4.0}));
    CHECK_THROWS_AS(tape.sqrt(x), NumericError);
    Tape lax;
    Var y = lax.sqrt(lax.constant(Tensor(1, 2, {-1.0, 4.0})));
    CHECK_FALSE(lax.val(y).all_finite());
}

TEST_CASE("gradients accumulate when a parameter is used twice") {
    ParamStore params;
    params.add("w", Tensor::scalar(3.0));
    Tape tape(&params);
    Var w = tape.param("w");
    Var w_again = tape.param("w");
    CHECK(w.id == w_again.id);
    Var loss = tape.add(tape.square(w), tape.scale(w_again, 4.0)); // w^2 + 4w
    GradMap g = tape.backward(loss);
    CHECK(g.at("w").item() == doctest::Approx(10.0));
}

}
