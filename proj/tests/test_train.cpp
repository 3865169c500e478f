#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "r2d/train.hpp"
#include "test_support.hpp"

using namespace r2d;
using namespace r2d::testing;

TEST_CASE("gd on the scalar quadratic follows the closed form (1-eta)^T theta0") {
    Problem p = scalar_problem({0.0});
    TrainConfig cfg{0.5, 2, 1, 0, 1, 0, true};
    TrainResult res = train(*p.model, p.data, {1.0}, cfg, "scalar_quadratic");
    CHECK(res.theta_final[0] == 0.25);  // exact in binary floating point
    CHECK(res.checkpoint.step_index == 1);
    CHECK(res.checkpoint.theta[0] == 0.5);
}

TEST_CASE("T = 0 returns theta0 and checkpoints it") {
    Problem p = scalar_problem({0.0});
    TrainConfig cfg{0.5, 0, 0, 0};
    TrainResult res = train(*p.model, p.data, {1.0}, cfg);
    CHECK(res.theta_final[0] == 1.0);
    CHECK(res.checkpoint.step_index == 0);
    CHECK(res.checkpoint.theta[0] == 1.0);
    CHECK(res.trajectory.steps.size() == 1);
}

TEST_CASE("step-size constraint is a hard error") {
    Problem p = scalar_problem({0.0});
    TrainConfig cfg{2.0, 2, 0, 0};  // L = 1, cap = 1/(2L) at m = 0
    CHECK_THROWS_WITH_AS(train(*p.model, p.data, {1.0}, cfg),
                         doctest::Contains("step-size constraint"), ValueError);
}

TEST_CASE("K > T is rejected") {
    Problem p = scalar_problem({0.0});
    TrainConfig cfg{0.4, 2, 3, 0};
    CHECK_THROWS_AS(train(*p.model, p.data, {1.0}, cfg), ValueError);
}

TEST_CASE("descent holds for every built-in problem at the capped step size") {
    for (const auto& name : problem_names()) {
        CAPTURE(name);
        Problem p = make_problem(name, 17, 30);
        const double L = p.model->constants().smoothness;
        TrainConfig cfg{0.95 * step_size_cap(L, 30, 0), 40, 0, 0, 1, 0, true};
        TrainResult res = train(*p.model, p.data, p.theta0, cfg, name);
        for (std::size_t i = 1; i < res.trajectory.losses.size(); ++i)
            CHECK(res.trajectory.losses[i] <= res.trajectory.losses[i - 1] + 1e-12);
    }
}

TEST_CASE("training is bit-deterministic") {
    Problem p = make_problem("tiny_mlp", 23, 20);
    TrainConfig cfg{p.recommended_eta, 25, 5, 0};
    TrainResult a = train(*p.model, p.data, p.theta0, cfg);
    TrainResult b = train(*p.model, p.data, p.theta0, cfg);
    REQUIRE(a.trajectory.thetas.size() == b.trajectory.thetas.size());
    for (std::size_t i = 0; i < a.trajectory.thetas.size(); ++i)
        for (std::size_t k = 0; k < a.trajectory.thetas[i].size(); ++k)
            CHECK(a.trajectory.thetas[i][k] == b.trajectory.thetas[i][k]);
}

TEST_CASE("checkpoint equals the trajectory entry at T - K bit-exactly") {
    Problem p = make_problem("logistic", 31, 25);
    TrainConfig cfg{p.recommended_eta, 30, 12, 0};
    TrainResult res = train(*p.model, p.data, p.theta0, cfg);
    const ParamVector& at = res.trajectory.at_step(18);
    REQUIRE(at.size() == res.checkpoint.theta.size());
    for (std::size_t k = 0; k < at.size(); ++k) CHECK(at[k] == res.checkpoint.theta[k]);
}

TEST_CASE("trajectory always records 0, T-K and T under a coarse stride") {
    Problem p = make_problem("logistic", 31, 25);
    TrainConfig cfg{p.recommended_eta, 30, 7, 0, 9};
    TrainResult res = train(*p.model, p.data, p.theta0, cfg);
    CHECK(res.trajectory.steps.front() == 0);
    CHECK(res.trajectory.steps.back() == 30);
    CHECK_NOTHROW(res.trajectory.at_step(23));
    for (std::size_t i = 1; i < res.trajectory.steps.size(); ++i)
        CHECK(res.trajectory.steps[i] > res.trajectory.steps[i - 1]);
}

TEST_CASE("perturb: sigma 0 is the identity") {
    GaussianStream g(1, "noise");
    ParamVector theta{1.0, -2.0};
    ParamVector out = perturb(theta, 0.0, g);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == -2.0);
    CHECK_THROWS_AS(perturb(theta, -0.5, g), ValueError);
}

TEST_CASE("perturb: fixed seed reproduces exactly") {
    ParamVector theta{0.0, 0.0};
    GaussianStream a(77, "noise");
    GaussianStream b(77, "noise");
    ParamVector x = perturb(theta, 1.0, a);
    ParamVector y = perturb(theta, 1.0, b);
    CHECK(x[0] == y[0]);
    CHECK(x[1] == y[1]);
    GaussianStream c(78, "noise");
    ParamVector z = perturb(theta, 1.0, c);
    CHECK(x[0] != z[0]);
}

TEST_CASE("perturb: statistical oracle over 1e5 draws") {
    GaussianStream g(5, "stats");
    const std::size_t N = 100000;
    const double sigma = 2.0;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double v = perturb({0.0}, sigma, g)[0];
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / N;
    const double var = sumsq / N - mean * mean;
    CHECK(std::abs(mean) <= 3.0 * sigma / std::sqrt(static_cast<double>(N)));
    CHECK(std::abs(var - 4.0) <= 0.05 * 4.0);
}

TEST_CASE("checkpoint file round-trips bit-exactly") {
    Problem p = make_problem("least_squares", 3, 12);
    TrainConfig cfg{p.recommended_eta, 10, 4, 0};
    TrainResult res = train(*p.model, p.data, p.theta0, cfg, "least_squares");
    const std::string path = "test_ckpt_roundtrip.bin";
    save_checkpoint(res.checkpoint, path);
    Checkpoint back = load_checkpoint(path);
    CHECK(back.step_index == res.checkpoint.step_index);
    CHECK(back.eta == res.checkpoint.eta);
    CHECK(back.dataset_fingerprint == res.checkpoint.dataset_fingerprint);
    CHECK(back.problem == "least_squares");
    CHECK_FALSE(back.reconstructed);
    REQUIRE(back.theta.size() == res.checkpoint.theta.size());
    for (std::size_t k = 0; k < back.theta.size(); ++k)
        CHECK(back.theta[k] == res.checkpoint.theta[k]);
    CHECK_NOTHROW(ensure_fingerprint(back, p.data));
    std::remove(path.c_str());
}

TEST_CASE("checkpoint against a different dataset is a mismatch error") {
    Problem p = make_problem("least_squares", 3, 12);
    Problem q = make_problem("least_squares", 4, 12);
    TrainConfig cfg{p.recommended_eta, 5, 0, 0};
    TrainResult res = train(*p.model, p.data, p.theta0, cfg);
    CHECK_THROWS_WITH_AS(ensure_fingerprint(res.checkpoint, q.data),
                         doctest::Contains("checkpoint/dataset mismatch"), IoError);
}

TEST_CASE("corrupt or truncated checkpoint files are parse errors") {
    const std::string path = "test_ckpt_bad.bin";
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOPE";
    }
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
    {
        std::ofstream out(path, std::ios::binary);
        out.write("R2D\0", 4);
        const std::uint16_t v = 1;
        out.write(reinterpret_cast<const char*>(&v), 2);
    }
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_checkpoint(path), IoError);  // missing file
}

TEST_CASE("trajectory csv has the documented columns") {
    Problem p = scalar_problem({0.0});
    TrainConfig cfg{0.5, 3, 0, 0};
    TrainResult res = train(*p.model, p.data, {1.0}, cfg);
    const std::string path = "test_traj.csv";
    write_trajectory_csv(res.trajectory, path, true);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,loss,grad_norm,theta_0");
    std::string row;
    std::getline(in, row);
    CHECK(row.substr(0, 2) == "0,");
    std::remove(path.c_str());
}
