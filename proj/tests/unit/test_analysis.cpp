#include <cmath>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "sgdlab/analysis/analysis.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/models/linreg.hpp"
#include "sgdlab/models/mlp.hpp"
#include "sgdlab/models/potentials.hpp"
#include "sgdlab/sgd/sgd.hpp"

using namespace sgdlab;

namespace {

std::shared_ptr<LinearRegression> make_linreg(std::size_t d, std::size_t n, std::uint64_t seed) {
    testgen::Gen g(seed);
    return linreg_model(std::make_shared<const Dataset>(d, g.normals(d * n), g.normals(n)));
}

// Covariance of xi over every size-B subset, each equally likely.
SymMatrix enumerated_sigma(std::span<const double> theta, const LossModel& m, std::size_t b) {
    const std::size_t n = m.sample_count(), p = m.dim();
    SymMatrix acc(p);
    std::size_t count = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != b) continue;
        std::vector<std::size_t> batch;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) batch.push_back(i);
        }
        const Vec xi = sgd_noise_sample(theta, m, batch);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i; j < p; ++j) acc.add(i, j, xi[i] * xi[j]);
        }
        ++count;
    }
    acc *= 1.0 / static_cast<double>(count);
    return acc;
}

}  // namespace

TEST_CASE("covariance prefactor values") {
    CHECK(covariance_prefactor(10, 1) == doctest::Approx(1.0));
    CHECK(covariance_prefactor(10, 10) == 0.0);
    CHECK(covariance_prefactor(5, 2) == doctest::Approx(0.5 * 3.0 / 4.0));
    CHECK(covariance_prefactor(1, 1) == 0.0);
    CHECK_THROWS_AS(covariance_prefactor(4, 5), InputError);
    CHECK_THROWS_AS(covariance_prefactor(4, 0), InputError);
}

TEST_CASE("sigma_exact equals the enumerated mini-batch covariance (N <= 6, every B)") {
    testgen::Gen g(99);
    for (std::size_t n = 1; n <= 6; ++n) {
        for (std::size_t b = 1; b <= n; ++b) {
            for (int trial = 0; trial < 3; ++trial) {
                CAPTURE(n);
                CAPTURE(b);
                const std::size_t d = 1 + g.index(0, 3);
                auto m = make_linreg(d, n, 1000 * n + 10 * b + trial);
                const Vec theta = g.normals(d);
                const CovarianceReport rep = sigma_exact(theta, *m, b);
                const SymMatrix oracle = enumerated_sigma(theta, *m, b);
                CHECK((rep.sigma_exact - oracle).frobenius() <= 1e-12 * (1.0 + oracle.frobenius()));
                const double trace = covariance_prefactor(n, b) * noise_strength(theta, *m);
                CHECK(std::abs(rep.sigma_exact.trace() - trace) <= 1e-12 * (1.0 + trace));
            }
        }
    }
}

TEST_CASE("sigma_empirical converges to sigma_exact and vanishes at B = N") {
    auto m = make_linreg(2, 4, 5);
    const Vec theta{0.3, -0.7};
    RngStream r(8);
    const SymMatrix emp = sigma_empirical(theta, *m, 2, 100000, r);
    CHECK(relative_frobenius_error(emp, sigma_exact(theta, *m, 2).sigma_exact) <= 0.05);
    const SymMatrix zero = sigma_empirical(theta, *m, 4, 10, r);
    CHECK(zero.frobenius() == 0.0);
    CHECK_THROWS_AS(sigma_empirical(theta, *m, 2, 1, r), InputError);
}

TEST_CASE("Sigma ~ 2 L H / B near the minimum when residuals are independent of inputs") {
    // Labels are drawn independently of x, so r = -y at theta* ~ 0 decouples from x x^T.
    auto m = make_linreg(5, 20000, 6);
    const Vec theta(m->minimizer().begin(), m->minimizer().end());
    for (std::size_t b : {1u, 10u}) {
        const SymMatrix exact = sigma_exact(theta, *m, b).sigma_exact;
        const SymMatrix approx = sigma_loss_hessian(m->loss(theta), m->gram(), b);
        CHECK(relative_frobenius_error(exact, approx) < 0.05);
    }
}

TEST_CASE("small-batch form drops the finite-population factor and the mean term") {
    auto m = make_linreg(2, 6, 7);
    const Vec theta{1.0, 0.5};
    const SymMatrix sb = sigma_small_batch(theta, *m, 3);
    SymMatrix ref(2);
    Vec g(2);
    for (std::size_t mu = 0; mu < 6; ++mu) {
        m->sample_grad(theta, mu, g);
        for (int i = 0; i < 2; ++i) {
            for (int j = i; j < 2; ++j) ref.add(i, j, g[i] * g[j] / 18.0);
        }
    }
    CHECK(relative_frobenius_error(sb, ref) < 1e-12);
}

TEST_CASE("decoupling is exact when every residual has the same magnitude") {
    testgen::Gen g(3);
    const std::size_t d = 3, n = 30;
    Vec x = g.normals(d * n), y(n);
    const Vec theta{0.5, -1.0, 0.25};
    for (std::size_t mu = 0; mu < n; ++mu) {
        double f = 0.0;
        for (std::size_t i = 0; i < d; ++i) f += theta[i] * x[mu * d + i];
        y[mu] = f + (mu % 2 ? 0.7 : -0.7);
    }
    auto m = linreg_model(std::make_shared<const Dataset>(d, x, y));
    const DecouplingReport rep = decoupling_check(theta, *m);
    CHECK(!rep.dual);
    CHECK((rep.exact_matrix - rep.decoupled_matrix).frobenius() <= 1e-12 * rep.exact_matrix.frobenius());
    CHECK(rep.loss == doctest::Approx(0.5 * 0.49));
    CHECK(relative_frobenius_error(rep.decoupled_matrix, 2.0 * rep.loss * gauss_newton_hessian(theta, *m)) < 1e-12);
}

TEST_CASE("planted independent residuals: overlap shrinks as N grows") {
    auto overlap_at = [](std::size_t n) {
        auto m = make_linreg(20, n, 40 + n);
        return decoupling_check(Vec(20, 0.0), *m).overlap;
    };
    const double small = overlap_at(100), large = overlap_at(10000);
    CHECK(large < small);
    CHECK(large < 0.1);
}

TEST_CASE("dual path: P > N uses the sample-space Gram spectra") {
    testgen::Gen g(4);
    auto data = std::make_shared<const Dataset>(3, g.normals(3 * 8), g.normals(8));
    RngStream init(2);
    MlpInstance inst = mlp_model({3, 6, 1}, Activation::tanh, data, init);
    const DecouplingReport rep = decoupling_check(inst.theta0, *inst.model);
    CHECK(rep.dual);
    CHECK(rep.exact_spectrum.size() == 8);
    // Nonzero eigenvalues of J^T D^2 J / N equal those of D J J^T D / N; compare traces.
    SymMatrix primal(inst.model->dim());
    Vec og(inst.model->dim());
    for (std::size_t mu = 0; mu < 8; ++mu) {
        const double r = inst.model->output_grad(inst.theta0, mu, og);
        for (std::size_t i = 0; i < og.size(); ++i) {
            for (std::size_t j = i; j < og.size(); ++j) primal.add(i, j, r * r * og[i] * og[j] / 8.0);
        }
    }
    double tr = 0.0;
    for (double e : rep.exact_spectrum.eigenvalues) tr += e;
    CHECK(tr == doctest::Approx(primal.trace()).epsilon(1e-10));
    CHECK(rep.exact_spectrum.max() == doctest::Approx(sym_eig(primal).max()).epsilon(1e-9));
}

TEST_CASE("decile_overlap on hand-built spectra") {
    Vec a(20), b(20);
    for (int i = 0; i < 20; ++i) {
        a[i] = 1.0 + i;
        b[i] = 1.0 + i;
    }
    CHECK(decile_overlap(a, b) == 0.0);
    b[0] = 100.0;  // lands in the top group after sorting: (19.5 vs (19+100)/2)
    b[1] = 0.0;    // bottom group, ignored after re-sorting
    const double top_a = (19.0 + 20.0) / 2.0, top_b = (20.0 + 100.0) / 2.0;
    CHECK(decile_overlap(a, b) >= std::abs(top_a - top_b) / top_a - 1e-12);
    CHECK_THROWS_AS(decile_overlap(Vec{}, Vec{}), InputError);
}

TEST_CASE("hessian_fd matches closed-form Hessians") {
    auto m = make_linreg(4, 30, 10);
    const Vec theta{0.1, 0.2, -0.3, 0.4};
    CHECK(relative_frobenius_error(hessian_fd(theta, *m), m->gram()) < 1e-7);
    auto well = double_well(1.0, 1.0, 0.2);
    const Vec x{0.4};
    CHECK(hessian_fd(x, *well)(0, 0) == doctest::Approx((*well->hessian(x))(0, 0)).epsilon(1e-6));
}

TEST_CASE("effective dimension counts outliers above the threshold") {
    const Vec eig{10.0, 3.0, 0.2, 0.05, 1e-9};
    const EffectiveDimension e = effective_dimension(eig, 1e-2, 1e-8);
    CHECK(e.n == 3);
    CHECK(e.threshold == doctest::Approx(0.1));
    CHECK(effective_dimension(Vec{1e-9, 1e-10}).n == 0);
    CHECK_THROWS_AS(effective_dimension(Vec{1.0, 2.0}), InputError);
    std::ostringstream out;
    write_spectrum_csv(Vec{2.0, 1.0}, out);
    CHECK(out.str() == "rank,eigenvalue\n1,2\n2,1\n");
}
