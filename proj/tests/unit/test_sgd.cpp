#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "doctest.h"
#include "gen.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/models/linreg.hpp"
#include "sgdlab/sgd/sgd.hpp"

using namespace sgdlab;

namespace {

std::shared_ptr<LinearRegression> make_linreg(std::size_t d, std::size_t n, std::uint64_t seed) {
    testgen::Gen g(seed);
    return linreg_model(std::make_shared<const Dataset>(d, g.normals(d * n), g.normals(n)));
}

}  // namespace

TEST_CASE("minibatches are distinct, in range and uniform over samples") {
    RngStream r(5);
    const std::size_t n = 12, b = 5;
    std::vector<int> hits(n, 0);
    const int draws = 60000;
    for (int k = 0; k < draws; ++k) {
        const auto batch = sample_minibatch(n, b, r);
        REQUIRE(batch.size() == b);
        CHECK(std::set<std::size_t>(batch.begin(), batch.end()).size() == b);
        for (auto i : batch) {
            REQUIRE(i < n);
            ++hits[i];
        }
    }
    const double expect = draws * static_cast<double>(b) / n;
    for (int h : hits) CHECK(std::abs(h - expect) < 5.0 * std::sqrt(expect));
    const auto full = sample_minibatch(n, n, r);
    for (std::size_t i = 0; i < n; ++i) CHECK(full[i] == i);
    CHECK_THROWS_AS(sample_minibatch(n, n + 1, r), InputError);
    CHECK_THROWS_AS(sample_minibatch(n, 0, r), InputError);
}

TEST_CASE("sgd_step and sgd_noise_sample follow their definitions") {
    auto m = make_linreg(3, 20, 1);
    const Vec theta{0.2, -0.1, 0.4};
    const std::vector<std::size_t> batch{3, 7, 11};
    Vec g(3, 0.0), tmp(3);
    for (auto mu : batch) {
        m->sample_grad(theta, mu, tmp);
        for (int i = 0; i < 3; ++i) g[i] += tmp[i] / 3.0;
    }
    const Vec next = sgd_step(theta, *m, batch, 0.1);
    for (int i = 0; i < 3; ++i) CHECK(next[i] == doctest::Approx(theta[i] - 0.1 * g[i]));
    const Vec full = m->grad(theta);
    const Vec xi = sgd_noise_sample(theta, *m, batch);
    for (int i = 0; i < 3; ++i) CHECK(xi[i] == doctest::Approx(-(g[i] - full[i])));

    std::vector<std::size_t> all(20);
    for (std::size_t i = 0; i < 20; ++i) all[i] = i;
    for (double v : sgd_noise_sample(theta, *m, all)) CHECK(v == 0.0);
}

TEST_CASE("noise strength equals the brute-force gradient variance and is never negative") {
    testgen::Gen g(2);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = make_linreg(4, 9, 100 + trial);
        const Vec theta = g.normals(4);
        Vec sq(4, 0.0), mean(4, 0.0), tmp(4);
        double s = 0.0;
        for (std::size_t mu = 0; mu < 9; ++mu) {
            m->sample_grad(theta, mu, tmp);
            for (int i = 0; i < 4; ++i) {
                s += tmp[i] * tmp[i] / 9.0;
                mean[i] += tmp[i] / 9.0;
            }
        }
        double mm = 0.0;
        for (double v : mean) mm += v * v;
        const double ns = noise_strength(theta, *m);
        CHECK(ns == doctest::Approx(s - mm).epsilon(1e-10));
        CHECK(ns >= 0.0);
    }
    // One sample: no spread, exactly zero.
    auto single = make_linreg(2, 1, 9);
    CHECK(noise_strength(Vec{0.3, 0.1}, *single) == 0.0);
}

TEST_CASE("run_sgd records on schedule and is reproducible") {
    auto m = make_linreg(2, 50, 3);
    const Vec theta0{1.0, -1.0};
    SgdConfig cfg{0.05, 5, 103, 10, true, true};
    RngStream r1(7), r2(7);
    const Trajectory a = run_sgd(*m, theta0, cfg, r1);
    const Trajectory b = run_sgd(*m, theta0, cfg, r2);
    REQUIRE(a.size() == 12);  // 0, 10, ..., 100, and the final step 103
    CHECK(a.steps.front() == 0);
    CHECK(a.steps[10] == 100);
    CHECK(a.steps.back() == 103);
    CHECK(a.times[3] == doctest::Approx(0.05 * 30));
    CHECK(a.losses == b.losses);
    CHECK(a.noise_strengths == b.noise_strengths);
    CHECK(a.snapshots.back() == a.final_theta);
    CHECK(a.losses.back() < a.losses.front());
    CHECK(!a.diverged);
}

TEST_CASE("run_sgd flags divergence instead of returning garbage") {
    auto m = make_linreg(1, 20, 4);
    SgdConfig cfg{50.0, 1, 1000, 1, false, false};
    RngStream r(1);
    const Trajectory t = run_sgd(*m, Vec{1.0}, cfg, r);
    CHECK(t.diverged);
    CHECK(!t.failure.empty());
    SgdConfig bad{0.1, 21, 10, 1, false, false};
    CHECK_THROWS_AS(bad.validate(20), InputError);
}
