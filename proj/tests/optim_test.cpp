#include <cmath>
#include <vector>

#include "doctest.h"
#include "spikeforge/optim.hpp"

using namespace spikeforge;

TEST_CASE("optim: first step matches the closed-form update")
{
    // With g=1 and fresh moments: m_hat = 1, v_hat = 1, so
    // theta' = theta - lr * (1/(1+eps) + wd*theta) for a decayed block.
    AdamWConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.01;
    Matrix theta = Matrix::Constant(1, 1, 2.0);
    AdamW opt(cfg);
    opt.add_param(&theta, true);
    auto grads = opt.make_grads();
    grads[0](0, 0) = 1.0;
    opt.step(grads);
    const double expect = 2.0 - 0.1 * (1.0 / (1.0 + cfg.eps) + 0.01 * 2.0);
    CHECK(theta(0, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("optim: decay applies only to registered weight blocks")
{
    AdamWConfig cfg;
    cfg.lr = 0.05;
    cfg.weight_decay = 0.5;
    Matrix weight = Matrix::Constant(1, 1, 1.0);
    Vector bias = Vector::Constant(1, 1.0);
    AdamW opt(cfg);
    opt.add_param(&weight, true);
    opt.add_param(&bias, false);
    auto grads = opt.make_grads();
    grads[0](0, 0) = 1.0;
    grads[1](0, 0) = 1.0;
    opt.step(grads);
    const double base = 0.05 * (1.0 / (1.0 + cfg.eps));
    CHECK(bias(0) == doctest::Approx(1.0 - base).epsilon(1e-12));
    CHECK(weight(0, 0) == doctest::Approx(1.0 - base - 0.05 * 0.5).epsilon(1e-12));
    CHECK(weight(0, 0) < bias(0));
}

TEST_CASE("optim: zero gradient with zero decay is a no-op")
{
    Matrix theta = Matrix::Random(3, 2);
    Matrix before = theta;
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    AdamW opt(cfg);
    opt.add_param(&theta, true);
    for (int i = 0; i < 5; ++i) opt.step(opt.make_grads());
    CHECK(theta == before);
}

TEST_CASE("optim: lr zero freezes parameters")
{
    Matrix theta = Matrix::Random(2, 2);
    Matrix before = theta;
    AdamWConfig cfg;
    cfg.lr = 0.0;
    AdamW opt(cfg);
    opt.add_param(&theta, true);
    auto grads = opt.make_grads();
    grads[0].setConstant(3.0);
    opt.step(grads);
    CHECK(theta == before);
}

TEST_CASE("optim: descends a convex quadratic")
{
    // f(x) = 0.5 * ||x - target||^2
    Matrix x = Matrix::Zero(4, 1);
    Matrix target = Matrix::Constant(4, 1, 3.0);
    AdamWConfig cfg;
    cfg.lr = 0.05;
    cfg.weight_decay = 0.0;
    AdamW opt(cfg);
    opt.add_param(&x, false);
    for (int it = 0; it < 2000; ++it) {
        std::vector<Matrix> grads = {x - target};
        opt.step(grads);
    }
    CHECK((x - target).norm() < 1e-2);
}

TEST_CASE("optim: vector blocks update like their matrix equivalents")
{
    AdamWConfig cfg;
    Matrix as_matrix = Matrix::Constant(3, 1, 1.5);
    Vector as_vector = Vector::Constant(3, 1.5);
    AdamW opt_m(cfg), opt_v(cfg);
    opt_m.add_param(&as_matrix, true);
    opt_v.add_param(&as_vector, true);
    Matrix g(3, 1);
    g << 0.5, -1.0, 2.0;
    for (int i = 0; i < 10; ++i) {
        opt_m.step({g});
        opt_v.step({g});
    }
    for (int i = 0; i < 3; ++i)
        CHECK(as_vector(i) == doctest::Approx(as_matrix(i, 0)).epsilon(1e-15));
}

TEST_CASE("optim: shape mismatches are rejected")
{
    Matrix theta = Matrix::Zero(2, 2);
    AdamW opt;
    opt.add_param(&theta, true);
    std::vector<Matrix> wrong_count;
    CHECK_THROWS_AS(opt.step(wrong_count), std::invalid_argument);
    std::vector<Matrix> wrong_shape = {Matrix::Zero(3, 2)};
    CHECK_THROWS_AS(opt.step(wrong_shape), std::invalid_argument);
}
