#include <doctest.h>

#include "r2d/rewind.hpp"
#include "r2d/train.hpp"
#include "test_support.hpp"

using namespace r2d;
using namespace r2d::testing;

TEST_CASE("rewind_step solves the scalar implicit equation") {
    // f = 0.5 theta^2, eta = 0.5: theta (1 - eta) = theta_next -> theta = 2
    Problem p = scalar_problem({0.0});
    ParamVector got = rewind_step(*p.model, p.data, {1.0}, 0.5, ProxConfig{});
    CHECK(approx_abs(got[0], 2.0, 1e-9));
}

TEST_CASE("rewind_step satisfies the residual postcondition") {
    Problem p = make_problem("logistic", 19, 20);
    const double L = p.model->constants().smoothness;
    const double eta = 0.5 / L;
    TrainConfig cfg{std::min(eta, 0.95 * step_size_cap(L, 20, 0)), 10, 0, 0};
    TrainResult res = train(*p.model, p.data, p.theta0, cfg);

    ProxConfig prox;
    prox.tolerance = 1e-10;
    RewindStats stats;
    ParamVector theta = rewind_step(*p.model, p.data, res.theta_final, cfg.eta, prox, &stats);
    ParamVector forward = add_scaled(theta, -cfg.eta, empirical_grad(*p.model, p.data, theta));
    CHECK(distance(forward, res.theta_final) <= 1e-10 * (1.0 + cfg.eta * L));
    CHECK(stats.inner_iterations > 0);
    CHECK(stats.gradient_evals == stats.inner_iterations * p.data.size());
}

TEST_CASE("eta >= 1/L is rejected") {
    Problem p = scalar_problem({0.0});  // L = 1
    CHECK_THROWS_WITH_AS(rewind_step(*p.model, p.data, {1.0}, 1.0, ProxConfig{}),
                         doctest::Contains("subproblem not convex"), ValueError);
    CHECK_THROWS_AS(rewind(*p.model, p.data, {1.0}, 1.5, 2, ProxConfig{}), ValueError);
}

TEST_CASE("inner iteration cap fails loudly") {
    Problem p = make_problem("tiny_mlp", 7, 15);
    ProxConfig prox;
    prox.max_inner_iterations = 2;
    prox.tolerance = 1e-14;
    CHECK_THROWS_AS(
        rewind_step(*p.model, p.data, p.theta0, 0.5 / p.model->constants().smoothness, prox),
        ConvergenceError);
}

TEST_CASE("rewind K = 0 returns theta_T unchanged") {
    Problem p = scalar_problem({0.0});
    ParamVector got = rewind(*p.model, p.data, {0.25}, 0.5, 0, ProxConfig{});
    CHECK(got[0] == 0.25);
}

TEST_CASE("scalar quadratic rewinds along the closed form (1-eta)^{-K}") {
    Problem p = scalar_problem({0.0});
    ParamVector got = rewind(*p.model, p.data, {0.25}, 0.5, 2, ProxConfig{});
    CHECK(approx_abs(got[0], 1.0, 1e-8));
}

TEST_CASE("round trips on every problem: rewind then replay, and rewind to checkpoint") {
    for (const auto& name : problem_names()) {
        CAPTURE(name);
        Problem p = make_problem(name, 29, 24);
        const double L = p.model->constants().smoothness;
        const double eta = std::min(0.25 / L, 0.95 * step_size_cap(L, 24, 0));
        const std::size_t T = 16;
        for (std::size_t K : {1ul, 4ul, 8ul}) {
            CAPTURE(K);
            TrainConfig cfg{eta, T, K, 0};
            TrainResult res = train(*p.model, p.data, p.theta0, cfg, name);

            RewindStats stats;
            ParamVector back =
                rewind(*p.model, p.data, res.theta_final, eta, K, ProxConfig{}, &stats);

            const double tau = 1e-10 * (1.0 + norm(res.theta_final));
            const double tol = 10.0 * tau * std::pow(1.0 + eta * L, static_cast<double>(K));

            // reconstruction matches the checkpoint saved during training
            CHECK(distance(back, res.checkpoint.theta) <= tol);

            // forward replay of K plain GD steps recovers theta_T
            ParamVector theta = back;
            for (std::size_t t = 0; t < K; ++t)
                theta = add_scaled(theta, -eta, empirical_grad(*p.model, p.data, theta));
            CHECK(distance(theta, res.theta_final) <= tol);
        }
    }
}

TEST_CASE("prox subproblem is midpoint-convex along random segments") {
    Problem p = make_problem("sine_pl", 41, 20);
    const double L = p.model->constants().smoothness;
    const double eta = 0.5 / L;
    const ParamVector anchor = p.theta0;
    auto phi = [&](const ParamVector& x) {
        return -empirical_loss(*p.model, p.data, x) +
               squared_norm(add_scaled(x, -1.0, anchor)) / (2.0 * eta);
    };
    GaussianStream g(2, "segments");
    for (int i = 0; i < 200; ++i) {
        ParamVector a = g.normal_vector(p.dim, 3.0);
        ParamVector b = g.normal_vector(p.dim, 3.0);
        ParamVector mid(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) mid[k] = 0.5 * (a[k] + b[k]);
        CHECK(phi(mid) <= 0.5 * (phi(a) + phi(b)) + 1e-9);
    }
}
