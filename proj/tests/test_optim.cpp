#include <doctest.h>

#include <cmath>
#include <vector>

#include "cass/errors.hpp"
#include "cass/optim.hpp"
#include "cass/rng.hpp"

using namespace cass;

namespace {

Param make_param(const std::string& name, std::vector<double> values, Rng* rng = nullptr) {
    Param p(name);
    p.init_shape({static_cast<int>(values.size())});
    p.value.v = std::move(values);
    if (rng)
        for (double& v : p.value.v) v = rng->normal();
    return p;
}

} // namespace

TEST_CASE("first step moves each weight by almost exactly the learning rate") {
    // With fresh moments, mhat/sqrt(vhat) = g/|g| up to eps, so the first
    // update is lr * sign(g) regardless of gradient magnitude.
    Param p = make_param("w", {1.0, -2.0, 3.0});
    p.grad.v = {0.5, -4.0, 1e-3};
    AdamConfig cfg;
    cfg.lr = 0.1;
    Adam opt({&p}, cfg);
    opt.step();
    CHECK(opt.steps() == 1);
    CHECK(p.value.v[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
    CHECK(p.value.v[1] == doctest::Approx(-2.0 + 0.1).epsilon(1e-6));
    CHECK(p.value.v[2] == doctest::Approx(3.0 - 0.1).epsilon(1e-4));
}

TEST_CASE("zero gradient leaves parameters in place") {
    Param p = make_param("w", {1.0, 2.0});
    AdamConfig cfg;
    Adam opt({&p}, cfg);
    opt.step();
    CHECK(p.value.v[0] == 1.0);
    CHECK(p.value.v[1] == 2.0);
}

TEST_CASE("update matches a scalar reference implementation") {
    Param p = make_param("w", {0.7});
    AdamConfig cfg;
    cfg.lr = 0.01;
    Adam opt({&p}, cfg);

    double w = 0.7, m = 0.0, v = 0.0;
    Rng rng(5);
    for (int t = 1; t <= 25; ++t) {
        const double g = rng.normal();
        p.grad.v[0] = g;
        opt.step();
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mhat = m / (1.0 - std::pow(0.9, t));
        const double vhat = v / (1.0 - std::pow(0.999, t));
        w -= 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
        CHECK(p.value.v[0] == doctest::Approx(w).epsilon(1e-14));
    }
}

TEST_CASE("opposite gradients return close to the start") {
    Rng rng(9);
    Param p = make_param("w", std::vector<double>(8, 0.0), &rng);
    const std::vector<double> start = p.value.v;
    AdamConfig cfg;
    cfg.lr = 0.05;
    Adam opt({&p}, cfg);
    std::vector<double> g(8);
    for (double& x : g) x = rng.normal();
    p.grad.v = g;
    opt.step();
    for (size_t i = 0; i < 8; ++i) p.grad.v[i] = -g[i];
    opt.step();
    for (size_t i = 0; i < 8; ++i)
        CHECK(std::fabs(p.value.v[i] - start[i]) < 10.0 * cfg.lr);
}

TEST_CASE("zero_grad clears every bound gradient") {
    Param a = make_param("a", {1.0, 2.0});
    Param b = make_param("b", {3.0});
    a.grad.v = {5.0, 6.0};
    b.grad.v = {7.0};
    Adam opt({&a, &b}, AdamConfig{});
    opt.zero_grad();
    CHECK(a.grad.v == std::vector<double>{0.0, 0.0});
    CHECK(b.grad.v == std::vector<double>{0.0});
}

TEST_CASE("descends a quadratic bowl") {
    Param p = make_param("w", {5.0, -3.0});
    AdamConfig cfg;
    cfg.lr = 0.05;
    Adam opt({&p}, cfg);
    for (int t = 0; t < 2000; ++t) {
        opt.zero_grad();
        for (size_t i = 0; i < 2; ++i) p.grad.v[i] = 2.0 * p.value.v[i];
        opt.step();
    }
    CHECK(std::fabs(p.value.v[0]) < 1e-3);
    CHECK(std::fabs(p.value.v[1]) < 1e-3);
}

TEST_CASE("moments round-trip through restore for exact resumption") {
    Rng rng(3);
    Param p1 = make_param("w", std::vector<double>(6, 0.0), &rng);
    Param p2 = p1; // identical twin
    AdamConfig cfg;
    cfg.lr = 0.02;
    Adam opt1({&p1}, cfg);

    auto fill_grads = [&](Param& p, uint64_t seed) {
        Rng g(seed);
        for (double& x : p.grad.v) x = g.normal();
    };
    for (uint64_t t = 0; t < 5; ++t) {
        fill_grads(p1, t);
        opt1.step();
    }

    // transplant state into a fresh optimizer over the twin parameters
    Adam opt2({&p2}, cfg);
    std::vector<Tensor> m(opt1.moment1().begin(), opt1.moment1().end());
    std::vector<Tensor> v(opt1.moment2().begin(), opt1.moment2().end());
    opt2.restore(opt1.steps(), m, v);
    p2.value.v = p1.value.v;

    for (uint64_t t = 5; t < 10; ++t) {
        fill_grads(p1, t);
        opt1.step();
        fill_grads(p2, t);
        opt2.step();
        CHECK(p1.value.v == p2.value.v);
    }
    CHECK(opt1.steps() == opt2.steps());

    std::vector<Tensor> wrong(1);
    wrong[0] = Tensor({2});
    CHECK_THROWS_AS(opt2.restore(3, wrong, wrong), DataError);
}

TEST_CASE("configuration validation") {
    Param p = make_param("w", {1.0});
    AdamConfig bad;
    bad.lr = 0.0;
    CHECK_THROWS_AS(Adam({&p}, bad), ConfigError);
}
