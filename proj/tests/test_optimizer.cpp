#include <cmath>
#include <vector>

#include "core/rng.hpp"
#include "core/tape.hpp"
#include "doctest.h"
#include "opt/optimizer.hpp"

using namespace sca;

namespace {

GradMap single_grad(const std::string& name, std::vector<double> v) {
    GradMap g;
    g.emplace(name, Tensor::row(v));
    return g;
}

// Plain-double Adam recursion, written independently of the tensor path.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    long t = 0;
    double update(double g, double rate, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
        ++t;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        double mhat = m / (1 - std::pow(b1, double(t)));
        double vhat = v / (1 - std::pow(b2, double(t)));
        return -rate * mhat / (std::sqrt(vhat) + eps);
    }
};

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("norm below threshold leaves gradients unchanged") {
    GradMap g = single_grad("w", {0.3, 0.4});
    double norm = clip_gradients(g, 1.0);
    CHECK(norm == doctest::Approx(0.5));
    CHECK(g.at("w").at(0) == 0.3);
    CHECK(g.at("w").at(1) == 0.4);
}

TEST_CASE("norm-5 gradient scales to the unit sphere") {
    GradMap g = single_grad("w", {3.0, 4.0});
    double norm = clip_gradients(g, 1.0);
    CHECK(norm == doctest::Approx(5.0));
    CHECK(g.at("w").at(0) == doctest::Approx(0.6));
    CHECK(g.at("w").at(1) == doctest::Approx(0.8));
}

TEST_CASE("clipped norm never exceeds the bound") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        GradMap g;
        for (int k = 0; k < 3; ++k) {
            Tensor t(4, 5);
            for (size_t i = 0; i < t.size(); ++i) t.at(i) = rng.gaussian() * std::pow(10.0, trial % 5);
            g.emplace("p" + std::to_string(k), t);
        }
        clip_gradients(g, 1.0);
        CHECK(grad_global_norm(g) <= 1.0 + 1e-12);
    }
}

TEST_CASE("clip norm spans multiple tensors") {
    GradMap g;
    g.emplace("a", Tensor::row({3.0}));
    g.emplace("b", Tensor::row({4.0}));
    CHECK(clip_gradients(g, 1.0) == doctest::Approx(5.0));
    CHECK(g.at("a").at(0) == doctest::Approx(0.6));
    CHECK(g.at("b").at(0) == doctest::Approx(0.8));
}

TEST_CASE("stepwise rate decays by floor of epoch over step") {
    Schedule s{2e-3, 100, 0.5};
    CHECK(lr_at(s, 250) == doctest::Approx(5e-4).epsilon(1e-12));
    CHECK(lr_at(s, 0) == 2e-3);
    CHECK(lr_at(s, 99) == 2e-3);
    CHECK(lr_at(s, 100) == doctest::Approx(1e-3));
    Schedule flat{2e-3, 100, 1.0};
    CHECK(lr_at(flat, 100000) == 2e-3);
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(lr_at(Schedule{1e-3, 0, 0.5}, 0), ConfigError);
    CHECK_THROWS_AS(lr_at(Schedule{1e-3, 10, 0.0}, 0), ConfigError);
    CHECK_THROWS_AS(lr_at(Schedule{1e-3, 10, 1.5}, 0), ConfigError);
    CHECK_THROWS_AS(lr_at(Schedule{1e-3, 10, 0.5}, -1), ContractError);
}

TEST_CASE("mask release holds then rises to zero") {
    AfeSchedule s{-6.0, 0.7, 5000};
    CHECK(afe_eta(s, 0) == -6.0);
    CHECK(afe_eta(s, 3000) == -6.0);
    CHECK(afe_eta(s, 3499) == -6.0);
    CHECK(afe_eta(s, 3500) == doctest::Approx(-6.0));  // continuous at the boundary
    CHECK(afe_eta(s, 4250) == doctest::Approx(-3.0));  // cosine midpoint
    CHECK(afe_eta(s, 5000) == 0.0);
}

TEST_CASE("mask release is monotone non-decreasing and non-positive") {
    AfeSchedule s{-6.0, 0.7, 1000};
    double prev = afe_eta(s, 0);
    for (int e = 1; e <= 1000; ++e) {
        double cur = afe_eta(s, e);
        CHECK(cur >= prev - 1e-15);
        CHECK(cur <= 0.0);
        prev = cur;
    }
    CHECK(prev == 0.0);
}

TEST_CASE("mask release degenerate holds") {
    AfeSchedule all_hold{-6.0, 1.0, 100};
    CHECK(afe_eta(all_hold, 50) == -6.0);
    CHECK(afe_eta(all_hold, 100) == 0.0);
    AfeSchedule no_hold{-6.0, 0.0, 100};
    CHECK(afe_eta(no_hold, 0) == doctest::Approx(-6.0));
    CHECK(afe_eta(no_hold, 100) == 0.0);
    CHECK_THROWS_AS(afe_eta(AfeSchedule{-6.0, 0.7, 100}, 101), ContractError);
    CHECK_THROWS_AS(afe_eta(AfeSchedule{1.0, 0.7, 100}, 0), ConfigError);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    ParamStore store;
    store.add("w", Tensor::row({1.5, -2.5}));
    AdamState adam;
    adam.step(store, single_grad("w", {0.0, 0.0}), 0.1);
    CHECK(store.get("w").at(0) == 1.5);
    CHECK(store.get("w").at(1) == -2.5);
}

TEST_CASE("zero rate is the identity") {
    ParamStore store;
    store.add("w", Tensor::row({1.5, -2.5}));
    AdamState adam;
    adam.step(store, single_grad("w", {0.7, -0.3}), 0.0);
    CHECK(store.get("w").at(0) == 1.5);
    CHECK(store.get("w").at(1) == -2.5);
}

TEST_CASE("first step moves by roughly rate times sign") {
    ParamStore store;
    store.add("w", Tensor::row({1.0, 1.0, 1.0}));
    AdamState adam;
    adam.step(store, single_grad("w", {0.9, -1e-3, 4.0}), 0.01);
    CHECK(store.get("w").at(0) == doctest::Approx(0.99).epsilon(1e-4));
    CHECK(store.get("w").at(1) == doctest::Approx(1.01).epsilon(1e-4));
    CHECK(store.get("w").at(2) == doctest::Approx(0.99).epsilon(1e-4));
}

TEST_CASE("tensor path matches an independent scalar recursion") {
    ParamStore store;
    store.add("w", Tensor::scalar(0.8));
    AdamState adam;
    ScalarAdam ref;
    double w_ref = 0.8;
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        double g = rng.gaussian();
        adam.step(store, single_grad("w", {g}), 0.05);
        w_ref += ref.update(g, 0.05);
        CHECK(store.get("w").item() == doctest::Approx(w_ref).epsilon(1e-14));
    }
    CHECK(adam.step_count() == 50);
}

TEST_CASE("converges on a scalar quadratic") {
    ParamStore store;
    store.add("w", Tensor::scalar(0.0));
    AdamState adam;
    for (int i = 0; i < 200; ++i) {
        double w = store.get("w").item();
        adam.step(store, single_grad("w", {2.0 * (w - 3.0)}), 0.1);
    }
    CHECK(std::fabs(store.get("w").item() - 3.0) < 1e-2);
}

TEST_CASE("moments are shaped like their parameters") {
    ParamStore store;
    store.add("w", Tensor(3, 4));
    GradMap g;
    g.emplace("w", Tensor(3, 4));
    AdamState adam;
    adam.step(store, g, 0.1);
    CHECK(adam.first_moments().at("w").rows() == 3);
    CHECK(adam.first_moments().at("w").cols() == 4);
    CHECK(adam.second_moments().at("w").rows() == 3);
    CHECK(adam.second_moments().at("w").cols() == 4);
}

TEST_CASE("non-finite gradient names the parameter") {
    ParamStore store;
    store.add("net.w0", Tensor::scalar(1.0));
    AdamState adam;
    GradMap g = single_grad("net.w0", {std::nan("")});
    CHECK_THROWS_WITH_AS(adam.step(store, g, 0.1), doctest::Contains("net.w0"), NumericError);
}

TEST_CASE("gradient shape mismatch is rejected") {
    ParamStore store;
    store.add("w", Tensor(2, 2));
    GradMap g;
    g.emplace("w", Tensor(2, 3));
    AdamState adam;
    CHECK_THROWS_AS(adam.step(store, g, 0.1), ShapeError);
}

TEST_CASE("decoupled weight decay shrinks parameters with zero gradient") {
    AdamConfig cfg;
    cfg.weight_decay = 0.1;
    ParamStore store;
    store.add("w", Tensor::scalar(2.0));
    AdamState adam(cfg);
    adam.step(store, single_grad("w", {0.0}), 0.5);
    CHECK(store.get("w").item() == doctest::Approx(2.0 - 0.5 * 0.1 * 2.0));
}

TEST_CASE("restore resumes the bias-correction sequence") {
    ParamStore a, b;
    a.add("w", Tensor::scalar(1.0));
    b.add("w", Tensor::scalar(1.0));
    AdamState full, head;
    Rng rng(11);
    std::vector<double> gs;
    for (int i = 0; i < 20; ++i) gs.push_back(rng.gaussian());
    for (int i = 0; i < 10; ++i) head.step(a, single_grad("w", {gs[size_t(i)]}), 0.05);
    AdamState tail;
    tail.restore(head.first_moments(), head.second_moments(), head.step_count());
    for (int i = 10; i < 20; ++i) tail.step(a, single_grad("w", {gs[size_t(i)]}), 0.05);
    for (int i = 0; i < 20; ++i) full.step(b, single_grad("w", {gs[size_t(i)]}), 0.05);
    CHECK(a.get("w").item() == b.get("w").item());
}

TEST_CASE("training loop descends a tape-built quadratic") {
    ParamStore store;
    store.add("w", Tensor::row({4.0, -3.0}));
    AdamState adam;
    auto build = [](Tape& t, int) {
        Var w = t.param("w");
        return t.sum_all(t.square(w));
    };
    TrainResult r = train_loop(store, adam, build, Schedule{0.05, 1000, 1.0}, 300);
    CHECK(r.loss_history.size() == 300);
    CHECK(r.loss_history.front() == doctest::Approx(25.0));
    CHECK(r.loss_history.back() < 1e-2);
    CHECK(r.final_step == 300);
    CHECK(std::fabs(store.get("w").at(0)) < 0.1);
}

TEST_CASE("zero epochs touches nothing") {
    ParamStore store;
    store.add("w", Tensor::scalar(1.25));
    AdamState adam;
    auto build = [](Tape& t, int) { return t.square(t.param("w")); };
    TrainResult r = train_loop(store, adam, build, Schedule{0.05, 100, 0.5}, 0);
    CHECK(r.loss_history.empty());
    CHECK(store.get("w").item() == 1.25);
    CHECK(adam.step_count() == 0);
}

TEST_CASE("loop reruns bit-identically from the same start") {
    auto run = [](std::vector<double>* hist) {
        ParamStore store;
        Rng rng(42);
        Tensor w(4, 4);
        for (size_t i = 0; i < w.size(); ++i) w.at(i) = rng.gaussian();
        store.add("w", w);
        AdamState adam;
        auto build = [](Tape& t, int e) {
            Var p = t.param("w");
            return t.scale(t.sum_all(t.square(p)), 1.0 + 0.1 * (e % 3));
        };
        TrainResult r = train_loop(store, adam, build, Schedule{0.02, 50, 0.5}, 120);
        *hist = r.loss_history;
        return store.get("w");
    };
    std::vector<double> h1, h2;
    Tensor w1 = run(&h1);
    Tensor w2 = run(&h2);
    CHECK(h1 == h2);
    CHECK(w1 == w2);
}

TEST_CASE("non-finite loss aborts with the epoch index") {
    ParamStore store;
    store.add("w", Tensor::scalar(1.0));
    AdamState adam;
    auto build = [](Tape& t, int e) {
        Var w = t.param("w");
        if (e == 3) {
            Var bad = t.div(w, t.scale(w, 0.0));  // inf, then inf*0 = nan below
            return t.add(t.square(w), t.scale(t.mul(bad, t.scale(w, 0.0)), 1.0));
        }
        return t.square(w);
    };
    Tape::set_default_check_finite(false);  // let the NaN reach the loss value
    CHECK_THROWS_WITH_AS(train_loop(store, adam, build, Schedule{0.05, 100, 1.0}, 10),
                         doctest::Contains("epoch 3"), NumericError);
    Tape::set_default_check_finite(true);
}

}  // TEST_SUITE
