#include <doctest.h>

#include <cstdio>
#include <limits>

#include "test_support.hpp"

using namespace r2d;
using namespace r2d::testing;

TEST_CASE("empirical loss: single-sample mean") {
    Problem p = scalar_problem({0.0});
    CHECK(empirical_loss(*p.model, p.data, {2.0}) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("empirical loss: hand evaluation over two samples") {
    Problem p = scalar_problem({0.0, 2.0});
    // mean of 0.5*(1)^2 and 0.5*(1)^2
    CHECK(empirical_loss(*p.model, p.data, {1.0}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("empirical loss rejects non-finite theta") {
    Problem p = scalar_problem({0.0});
    CHECK_THROWS_AS(empirical_loss(*p.model, p.data,
                                   {std::numeric_limits<double>::quiet_NaN()}),
                    EvalError);
}

TEST_CASE("empirical grad: symmetric minimizer and single sample") {
    Problem p = scalar_problem({0.0, 2.0});
    CHECK(empirical_grad(*p.model, p.data, {1.0})[0] == 0.0);
    Problem q = scalar_problem({0.0});
    CHECK(empirical_grad(*q.model, q.data, {2.0})[0] == 2.0);
}

TEST_CASE("empirical grad matches finite differences on random inputs") {
    Problem p = make_problem("logistic", 11, 40);
    GaussianStream g(3, "fd-points");
    for (int i = 0; i < 20; ++i) {
        ParamVector theta = g.normal_vector(p.dim);
        ParamVector an = empirical_grad(*p.model, p.data, theta);
        ParamVector fd = finite_diff_grad(*p.model, p.data, theta, 1e-5);
        CHECK(distance(an, fd) <= 1e-5 * std::max(1.0, norm(an)));
    }
}

TEST_CASE("empirical grad is bit-deterministic") {
    Problem p = make_problem("tiny_mlp", 5, 30);
    GaussianStream g(9, "det");
    ParamVector theta = g.normal_vector(p.dim);
    ParamVector a = empirical_grad(*p.model, p.data, theta);
    ParamVector b = empirical_grad(*p.model, p.data, theta);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("split: hand cases") {
    Dataset d = scalar_data({10.0, 11.0, 12.0});

    SUBCASE("middle index") {
        auto r = split(d, SplitSpec({1}));
        REQUIRE(r.retain.size() == 2);
        CHECK(r.retain[0].features[0] == 10.0);
        CHECK(r.retain[1].features[0] == 12.0);
        REQUIRE(r.forget.size() == 1);
        CHECK(r.forget[0].features[0] == 11.0);
    }
    SUBCASE("empty forget set") {
        auto r = split(d, SplitSpec{});
        CHECK(r.retain.size() == 3);
        CHECK(r.forget.empty());
        CHECK(r.retain.fingerprint() == d.fingerprint());
    }
    SUBCASE("forgetting everything is rejected") {
        CHECK_THROWS_AS(split(d, SplitSpec({0, 1, 2})), ValueError);
    }
    SUBCASE("out-of-range index is rejected") {
        CHECK_THROWS_AS(split(d, SplitSpec({5})), ValueError);
    }
    SUBCASE("indices must be strictly increasing") {
        CHECK_THROWS_AS(SplitSpec({1, 1}), ValueError);
        CHECK_THROWS_AS(SplitSpec({2, 0}), ValueError);
    }
}

TEST_CASE("decomposition identity: n f_D = (n-m) f_D' + sum_Z f_z") {
    for (const char* name : {"scalar_quadratic", "logistic", "tiny_mlp"}) {
        Problem p = make_problem(name, 21, 24);
        SplitSpec spec = random_split(24, 5, 77);
        auto r = split(p.data, spec);
        GaussianStream g(4, "decomp");
        for (int i = 0; i < 5; ++i) {
            ParamVector theta = g.normal_vector(p.dim);
            const double full = 24.0 * empirical_loss(*p.model, p.data, theta);
            double parts = 19.0 * empirical_loss(*p.model, r.retain, theta);
            for (const Sample& z : r.forget) parts += p.model->sample_loss(z, theta);
            CHECK(approx_rel(full, parts, 1e-12));
        }
    }
}

TEST_CASE("fingerprint is order-sensitive and content-stable") {
    Dataset a = scalar_data({1.0, 2.0});
    Dataset b = scalar_data({2.0, 1.0});
    Dataset c = scalar_data({1.0, 2.0});
    CHECK(a.fingerprint() != b.fingerprint());
    CHECK(a.fingerprint() == c.fingerprint());
    Dataset d = scalar_data({1.0, 2.0000000000000004});
    CHECK(a.fingerprint() != d.fingerprint());
}

TEST_CASE("dataset csv round-trips the fingerprint exactly") {
    Problem p = make_problem("least_squares", 13, 17);
    const std::string path = "test_model_roundtrip.csv";
    save_dataset_csv(p.data, path);
    Dataset back = load_dataset_csv(path);
    CHECK(back.fingerprint() == p.data.fingerprint());
    CHECK(back.size() == p.data.size());
    std::remove(path.c_str());
}

TEST_CASE("dataset rejects empty and ragged input") {
    CHECK_THROWS_AS(Dataset(std::vector<Sample>{}), ValueError);
    std::vector<Sample> ragged{Sample{{1.0, 2.0}, 0.0}, Sample{{1.0}, 0.0}};
    CHECK_THROWS_AS(Dataset(std::move(ragged)), ValueError);
    std::vector<Sample> inf{Sample{{std::numeric_limits<double>::infinity()}, 0.0}};
    CHECK_THROWS_AS(Dataset(std::move(inf)), ValueError);
}
