#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/models/dataset.hpp"
#include "sgdlab/models/linreg.hpp"
#include "sgdlab/models/mlp.hpp"
#include "sgdlab/models/potentials.hpp"

using namespace sgdlab;

namespace {

// Central-difference gradient, independent of the analytic backward pass.
Vec fd_grad(const std::function<double(const Vec&)>& f, Vec x, double h = 1e-6) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::shared_ptr<const Dataset> small_data(std::size_t d, std::size_t n, std::uint64_t seed) {
    testgen::Gen g(seed);
    return std::make_shared<const Dataset>(d, g.normals(d * n), g.normals(n));
}

}  // namespace

TEST_CASE("dataset CSV round-trips bit-exactly") {
    RngStream r(3);
    const Dataset d = linreg_generate(3, 25, r);
    std::ostringstream out;
    write_csv(d, out);
    CHECK(out.str().rfind("x_0,x_1,x_2,y\n", 0) == 0);
    std::istringstream in(out.str());
    const Dataset back = read_csv(in);
    REQUIRE(back.size() == 25);
    for (std::size_t i = 0; i < d.inputs().size(); ++i) CHECK(back.inputs()[i] == d.inputs()[i]);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(back.label(i) == d.label(i));
}

TEST_CASE("binary teacher labels are signs of a linear teacher") {
    RngStream r(4);
    const Dataset d = binary_teacher_generate(5, 200, r);
    int pos = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(std::abs(d.label(i)) == 1.0);
        pos += d.label(i) > 0 ? 1 : 0;
    }
    CHECK(pos > 60);
    CHECK(pos < 140);
}

TEST_CASE("linear regression: closed-form loss and gradient agree with per-sample sums") {
    testgen::Gen g(21);
    for (std::size_t d : {1u, 2u, 7u}) {
        auto m = linreg_model(small_data(d, 40, 100 + d));
        for (int trial = 0; trial < 5; ++trial) {
            const Vec theta = g.normals(d);
            CHECK(m->loss(theta) == doctest::Approx(m->loss_by_samples(theta)).epsilon(1e-12));
            Vec fast(d), slow(d);
            m->grad(theta, fast);
            m->LossModel::grad(theta, slow);
            CHECK(max_abs_diff(fast, slow) < 1e-12);
            const Vec fd = fd_grad([&](const Vec& x) { return m->loss_by_samples(x); }, theta);
            CHECK(max_abs_diff(fast, fd) < 1e-6);
        }
        // The stored minimizer is stationary and its loss is the stored minimum.
        const Vec at_min = m->grad(m->minimizer());
        CHECK(max_abs_diff(at_min, Vec(d, 0.0)) < 1e-12);
        CHECK(m->loss(m->minimizer()) == doctest::Approx(m->min_loss()));
        CHECK(relative_frobenius_error(*m->hessian(m->minimizer()), m->gram()) == 0.0);
    }
}

TEST_CASE("linear regression output gradient is the input and the residual is f - y") {
    auto m = linreg_model(small_data(3, 5, 8));
    const Vec theta{0.5, -1.0, 2.0};
    Vec out(3);
    const double r = m->output_grad(theta, 2, out);
    const auto x = m->data().input(2);
    CHECK(r == doctest::Approx(0.5 * x[0] - x[1] + 2.0 * x[2] - m->data().label(2)));
    for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == x[i]);
    CHECK(m->sample_loss(theta, 2) == doctest::Approx(0.5 * r * r));
}

TEST_CASE("MLP gradients match finite differences for every activation") {
    testgen::Gen g(33);
    auto data = small_data(4, 6, 9);
    for (Activation act : {Activation::identity, Activation::tanh, Activation::relu}) {
        for (bool bias : {true, false}) {
            CAPTURE(to_string(act));
            CAPTURE(bias);
            RngStream init(77);
            MlpInstance inst = mlp_model({4, 5, 3, 1}, act, data, init, bias);
            const Mlp& net = *inst.model;
            Vec theta = inst.theta0;
            for (auto& t : theta) t += 0.1 * g.normal();  // move biases off zero
            for (std::size_t mu = 0; mu < data->size(); ++mu) {
                Vec grad(net.dim());
                net.sample_grad(theta, mu, grad);
                const Vec fd = fd_grad([&](const Vec& x) { return net.sample_loss(x, mu); }, theta);
                CHECK(max_abs_diff(grad, fd) < 1e-6);

                Vec og(net.dim());
                const double r = net.output_grad(theta, mu, og);
                const Vec fdo = fd_grad([&](const Vec& x) { return net.predict(x, data->input(mu)); }, theta);
                CHECK(max_abs_diff(og, fdo) < 1e-6);
                CHECK(r == doctest::Approx(net.predict(theta, data->input(mu)) - data->label(mu)));
            }
        }
    }
}

TEST_CASE("MLP parameter count and Glorot scale") {
    auto data = small_data(10, 4, 10);
    RngStream init(1);
    MlpInstance inst = mlp_model({10, 100, 100, 1}, Activation::relu, data, init);
    CHECK(inst.model->dim() == 10 * 100 + 100 + 100 * 100 + 100 + 100 + 1);
    // Second layer weights: variance 2 / (100 + 100).
    double s2 = 0.0;
    const std::size_t off = 10 * 100 + 100;
    for (std::size_t i = 0; i < 100 * 100; ++i) s2 += inst.theta0[off + i] * inst.theta0[off + i];
    CHECK(s2 / 1e4 == doctest::Approx(0.01).epsilon(0.05));
    CHECK_THROWS_AS(Mlp({10, 5, 2}, Activation::relu, data), InputError);
}

TEST_CASE("double well: critical points, gradients and Hessians") {
    const double a = 0.7, w = 1.3, c = 4.0;
    const double L0 = offset_for_ratio(a, w, c);
    auto well = double_well(a, w, L0);
    const auto& mn = well->first(CriticalKind::minimum);
    const auto& sd = well->first(CriticalKind::saddle);
    CHECK(sd.loss / mn.loss == doctest::Approx(c));
    CHECK(mn.hessian(0, 0) == doctest::Approx(8.0 * a * w * w));
    CHECK(sd.hessian(0, 0) == doctest::Approx(-4.0 * a * w * w));
    for (const auto& cp : well->catalog()) CHECK(std::abs(well->grad(cp.location)[0]) < 1e-12);
    testgen::Gen g(4);
    for (int i = 0; i < 20; ++i) {
        const Vec x{g.uniform(-2.0, 2.0)};
        const Vec fd = fd_grad([&](const Vec& t) { return well->loss(t); }, x);
        CHECK(well->grad(x)[0] == doctest::Approx(fd[0]).epsilon(1e-6).scale(1.0));
        const double h = 1e-5;
        const double hfd = (well->grad(Vec{x[0] + h})[0] - well->grad(Vec{x[0] - h})[0]) / (2 * h);
        CHECK((*well->hessian(x))(0, 0) == doctest::Approx(hfd).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("separable double well and quadratic well") {
    auto sep = nd_double_well(3, 1, 1.0, 1.0, 0.25, Vec{2.0, 5.0});
    const Vec x{0.3, 0.8, -0.4};
    CHECK(sep->loss(x) == doctest::Approx(0.25 + std::pow(0.64 - 1.0, 2) + 0.5 * 2.0 * 0.09 + 0.5 * 5.0 * 0.16));
    const Vec fd = fd_grad([&](const Vec& t) { return sep->loss(t); }, x);
    CHECK(max_abs_diff(sep->grad(x), fd) < 1e-7);
    const auto& mn = sep->first(CriticalKind::minimum);
    CHECK(mn.hessian(0, 0) == 2.0);
    CHECK(mn.hessian(1, 1) == doctest::Approx(8.0));
    CHECK(mn.hessian(2, 2) == 5.0);

    auto q = nd_quadratic_well(Vec{1.0, 3.0}, 2.0);
    CHECK(q->loss(Vec{1.0, 1.0}) == doctest::Approx(2.0 + 0.5 + 1.5));
    CHECK_THROWS_AS(nd_quadratic_well(Vec{1.0}, 0.0), InputError);
}
