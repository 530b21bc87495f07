#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>

#include "doctest.h"
#include "gen.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/linalg.hpp"
#include "sgdlab/numerics/parallel.hpp"
#include "sgdlab/numerics/rng.hpp"
#include "sgdlab/numerics/stats.hpp"

using namespace sgdlab;

namespace {

SymMatrix random_sym(testgen::Gen& g, std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) m.set(i, j, g.normal());
    }
    return m;
}

SymMatrix random_psd(testgen::Gen& g, std::size_t n, std::size_t rank) {
    SymMatrix m(n);
    for (std::size_t r = 0; r < rank; ++r) {
        const Vec v = g.normals(n);
        m.rank1_update_upper(1.0, v);
    }
    m.mirror_upper();
    return m;
}

SymMatrix product(const SymMatrix& a, const SymMatrix& b) {
    const std::size_t n = a.dim();
    Vec rows(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += a(i, k) * b(k, j);
            rows[i * n + j] = s;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) rows[i * n + j] = rows[j * n + i] = 0.5 * (rows[i * n + j] + rows[j * n + i]);
    }
    return SymMatrix::from_rows(n, rows);
}

}  // namespace

TEST_CASE("SymMatrix keeps both triangles identical") {
    SymMatrix m(3);
    m.set(0, 2, 1.5);
    m.add(2, 0, 0.5);
    CHECK(m(0, 2) == 2.0);
    CHECK(m(2, 0) == 2.0);
    CHECK_THROWS_AS(SymMatrix::from_rows(2, Vec{1, 2, 3, 4}), InputError);
    CHECK(SymMatrix::identity(4).trace() == 4.0);
}

TEST_CASE("eigendecomposition reconstructs random symmetric matrices") {
    testgen::Gen g(11);
    for (std::size_t n : {1u, 2u, 5u, 17u, 40u}) {
        CAPTURE(n);
        const SymMatrix m = random_sym(g, n);
        const Spectrum j = sym_eig_jacobi(m);
        const Spectrum t = sym_eig_tridiagonal(m);
        CHECK(relative_frobenius_error(j.reconstruct(), m) < 1e-12);
        CHECK(relative_frobenius_error(t.reconstruct(), m) < 1e-12);
        CHECK(std::is_sorted(j.eigenvalues.rbegin(), j.eigenvalues.rend()));
        double trace = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(j.eigenvalues[k] == doctest::Approx(t.eigenvalues[k]).epsilon(1e-10).scale(1.0));
            trace += j.eigenvalues[k];
            CHECK(std::abs(std::sqrt(std::inner_product(j.eigenvectors[k].begin(), j.eigenvectors[k].end(),
                                                        j.eigenvectors[k].begin(), 0.0)) - 1.0) < 1e-12);
        }
        CHECK(trace == doctest::Approx(m.trace()).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("2x2 eigenvalues match the closed form") {
    const SymMatrix m = SymMatrix::from_rows(2, Vec{2.0, 1.0, 1.0, 3.0});
    const Spectrum s = sym_eig(m);
    const double disc = std::sqrt(0.25 + 1.0);
    CHECK(s.eigenvalues[0] == doctest::Approx(2.5 + disc));
    CHECK(s.eigenvalues[1] == doctest::Approx(2.5 - disc));
}

TEST_CASE("psd_sqrt squares back and psd_pinv satisfies the Penrose identity") {
    testgen::Gen g(12);
    for (std::size_t n : {1u, 3u, 8u}) {
        for (std::size_t rank : {std::size_t{1}, n}) {
            CAPTURE(n);
            CAPTURE(rank);
            const SymMatrix m = random_psd(g, n, rank);
            const SymMatrix r = psd_sqrt(m);
            CHECK(relative_frobenius_error(product(r, r), m) < 1e-10);
            const SymMatrix p = psd_pinv(m);
            CHECK(relative_frobenius_error(product(product(m, p), m), m) < 1e-9);
        }
    }
    const SymMatrix neg = SymMatrix::diagonal(Vec{1.0, -0.5});
    CHECK_THROWS_AS(psd_sqrt(neg), NotPsdError);
}

TEST_CASE("pairwise_sum is exact on integers and accurate on cancellation-prone input") {
    Vec v(100001);
    std::iota(v.begin(), v.end(), 0.0);
    CHECK(pairwise_sum(v) == 100000.0 * 100001.0 / 2.0);
    Vec w(1 << 20, 0.1);
    CHECK(std::abs(pairwise_sum(w) - 0.1 * (1 << 20)) < 1e-8);
    CHECK(pairwise_sum(Vec{}) == 0.0);
}

TEST_CASE("RngStream is deterministic and substreams are independent of draw order") {
    RngStream a(42, 3), b(42, 3), c(42, 4);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream a2(42, 3);
    CHECK(a2.next_u64() != c.next_u64());

    const RngStream root(9);
    RngStream s5 = root.substream(5);
    const std::uint64_t first = s5.next_u64();
    RngStream other = root.substream(1);
    for (int i = 0; i < 10; ++i) other.next_u64();
    CHECK(root.substream(5).next_u64() == first);
}

TEST_CASE("uniform, index and normal draws have the right moments") {
    RngStream r(1);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, u = 0.0;
    std::vector<int> counts(7, 0);
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
        const double x = r.uniform();
        CHECK((x >= 0.0 && x < 1.0));
        u += x;
        ++counts[r.uniform_index(7)];
    }
    CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(u / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    for (int c : counts) CHECK(std::abs(c - n / 7.0) < 5.0 * std::sqrt(n / 7.0));
}

TEST_CASE("histogram bins half-open intervals with a closed last bin") {
    const Vec edges{0.0, 1.0, 2.0};
    const Histogram h = histogram(Vec{0.0, 0.5, 1.0, 2.0, 2.5, -1.0}, edges);
    CHECK(h.counts == std::vector<std::uint64_t>{2, 2});
    CHECK(h.total == 4);
    CHECK_THROWS_AS(histogram(Vec{1.0}, Vec{1.0, 1.0}), InputError);
    const Vec u = uniform_edges(-1.0, 1.0, 4);
    CHECK(u == Vec{-1.0, -0.5, 0.0, 0.5, 1.0});
}

TEST_CASE("quantile interpolates linearly") {
    const Vec v{4.0, 1.0, 3.0, 2.0};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(v, 1.0 / 3.0) == doctest::Approx(2.0));
}

TEST_CASE("loglog_fit recovers exact power laws") {
    testgen::Gen g(5);
    for (int trial = 0; trial < 20; ++trial) {
        const double slope = g.uniform(-12.0, 3.0), amp = g.uniform(0.1, 10.0);
        Vec xs, ys, ws;
        for (int i = 0; i < 10; ++i) {
            xs.push_back(g.uniform(0.1, 50.0));
            ys.push_back(amp * std::pow(xs.back(), slope));
            ws.push_back(g.uniform(0.5, 3.0));
        }
        const LogLogFit f = loglog_fit(xs, ys, ws);
        CHECK(f.slope == doctest::Approx(slope).epsilon(1e-10));
        CHECK(f.intercept == doctest::Approx(std::log(amp)).epsilon(1e-9).scale(1.0));
        CHECK(f.r2 == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(loglog_fit(Vec{1.0}, Vec{2.0}), FitError);
}

TEST_CASE("mean_se uses the n - 1 sample variance") {
    const MeanSe m = mean_se(Vec{1.0, 2.0, 3.0, 4.0});
    CHECK(m.mean == 2.5);
    CHECK(m.se == doctest::Approx(std::sqrt((5.0 / 3.0) / 4.0)));
}

TEST_CASE("ks_distance on hand-checked samples") {
    const Vec one4(4, 1.0);
    CHECK(ks_distance(Vec{1, 2, 3, 4}, one4, Vec{1, 2, 3, 4}, one4) == 0.0);
    CHECK(ks_distance(Vec{1, 2}, Vec{1, 1}, Vec{3, 4}, Vec{1, 1}) == 1.0);
    CHECK(ks_distance(Vec{1, 2, 3, 4}, one4, Vec{3, 4, 5, 6}, one4) == doctest::Approx(0.5));
    // Weights act as multiplicities.
    CHECK(ks_distance(Vec{1, 2}, Vec{3, 1}, Vec{1, 1, 1, 2}, one4) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("chi_square_gof matches hand values and the dof-2 closed form") {
    const std::vector<std::uint64_t> perfect{10, 20, 30};
    const ChiSquare p = chi_square_gof(perfect, Vec{1.0 / 6, 1.0 / 3, 0.5});
    CHECK(p.statistic == doctest::Approx(0.0).scale(1.0));
    CHECK(p.p_value == doctest::Approx(1.0));

    const std::vector<std::uint64_t> obs{20, 30, 50};
    const ChiSquare c = chi_square_gof(obs, Vec{0.3, 0.3, 0.4});
    CHECK(c.statistic == doctest::Approx(100.0 / 30.0 + 100.0 / 40.0));
    CHECK(c.dof == 2);
    CHECK(c.p_value == doctest::Approx(std::exp(-c.statistic / 2.0)));

    // Cells under min_expected merge into their right neighbour.
    const std::vector<std::uint64_t> sparse{1, 1, 48, 50};
    const ChiSquare m = chi_square_gof(sparse, Vec{0.01, 0.01, 0.48, 0.5});
    CHECK(m.dof == 1);
}

TEST_CASE("parallel_for output does not depend on the thread count") {
    auto run = [] {
        Vec out(257);
        parallel_for(out.size(), [&](std::size_t i) {
            RngStream r = RngStream(3).substream(i);
            out[i] = r.normal() + static_cast<double>(i);
        });
        return out;
    };
    setenv("LAB_THREADS", "1", 1);
    const Vec one = run();
    setenv("LAB_THREADS", "4", 1);
    const Vec four = run();
    unsetenv("LAB_THREADS");
    CHECK(one == four);

    setenv("LAB_THREADS", "3", 1);
    CHECK(thread_count() == 3);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                        if (i == 7) throw FitError("boom");
                    }),
                    FitError);
    unsetenv("LAB_THREADS");
}
