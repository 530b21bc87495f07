#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/escape/escape.hpp"
#include "sgdlab/models/linreg.hpp"
#include "sgdlab/models/potentials.hpp"

using namespace sgdlab;

namespace {

EscapeGeometry well_geometry(double a, double w, double c) {
    EscapeGeometry g;
    g.L_min = offset_for_ratio(a, w, c);
    g.L_saddle = c * g.L_min;
    g.h_star = 8.0 * a * w * w;
    g.h_e_saddle = -4.0 * a * w * w;
    return g;
}

}  // namespace

TEST_CASE("theory_phi and stability dimension") {
    CHECK(theory_phi(1, 0.1, 1) == doctest::Approx(11.0));
    CHECK(theory_phi(4, 0.01, 2) == doctest::Approx(201.0));
    CHECK(stability_max_dim(1, 0.1, 1) == doctest::Approx(22.0));
    CHECK_THROWS_AS(theory_phi(1, 0.0, 1), InputError);
}

TEST_CASE("Kramers rate: prefactor and exponent 1/2 + 1/T") {
    const double T = 0.3, a = 1.0, w = 1.0;
    const double h = 8.0 * a * w * w, batch = 1.0, lr = T * batch / h;
    const EscapeGeometry g3 = well_geometry(a, w, 3.0), g10 = well_geometry(a, w, 10.0);
    const double k3 = kramers_rate_1d(g3, batch, lr);
    CHECK(k3 == doctest::Approx(std::sqrt(8.0 * 4.0) / (2.0 * std::numbers::pi) * std::pow(3.0, -(0.5 + 1.0 / T))));
    const double slope = std::log(kramers_rate_1d(g10, batch, lr) / k3) / std::log(10.0 / 3.0);
    CHECK(slope == doctest::Approx(-(0.5 + 1.0 / T)));
}

TEST_CASE("Langer rate reduces to Kramers in one dimension") {
    testgen::Gen gen(17);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = gen.uniform(0.2, 3.0), w = gen.uniform(0.5, 2.0), c = gen.uniform(1.5, 20.0);
        EscapeGeometry g = well_geometry(a, w, c);
        g.det_ratio = g.h_star / std::abs(g.h_e_saddle);
        const double batch = 1.0 + gen.index(0, 10), lr = gen.uniform(0.001, 0.2);
        const LangerRate l = langer_rate_multi(g, batch, lr);
        CHECK(l.kappa == doctest::Approx(kramers_rate_1d(g, batch, lr)).epsilon(1e-12));
        CHECK(l.exponent == doctest::Approx(batch / (lr * g.h_star) + 0.5));
        CHECK(!l.unstable);
    }
    EscapeGeometry g = well_geometry(1.0, 1.0, 5.0);
    g.n = 30;
    const LangerRate big = langer_rate_multi(g, 1.0, 1.0);  // B/(eta h*) = 1/8, so n_max = 2.25
    CHECK(big.unstable);
    CHECK(big.exponent == doctest::Approx(0.125 + 1.0 - 15.0));
    g.L_saddle = 0.5 * g.L_min;
    CHECK_THROWS_AS(langer_rate_multi(g, 1.0, 1.0), InputError);
}

TEST_CASE("fit_power_law recovers the Student-t exponent") {
    // Student-t with nu dof has density (1 + x^2 / nu)^-(nu + 1) / 2, a power law in L = 1 + x^2 / nu.
    const int nu = 5;
    testgen::Gen g(23);
    Vec xs(400000);
    for (auto& x : xs) {
        double chi2 = 0.0;
        for (int k = 0; k < nu; ++k) {
            const double z = g.normal();
            chi2 += z * z;
        }
        x = g.normal() / std::sqrt(chi2 / nu);
    }
    const PowerLawFit f = fit_power_law(xs, [&](double x) { return 1.0 + x * x / nu; });
    CHECK(f.phi_hat == doctest::Approx(0.5 * (nu + 1)).epsilon(0.05));
    CHECK(f.ci_low < f.phi_hat);
    CHECK(f.ci_high > f.phi_hat);
    CHECK(f.bins_used >= 10);
    CHECK_THROWS_AS(fit_power_law(Vec(10, 0.0), [](double) { return 1.0; }), InputError);
}

TEST_CASE("SGD first-passage times are monotone in c and reproducible") {
    testgen::Gen g(5);
    auto m = linreg_model(std::make_shared<const Dataset>(1, g.normals(200), g.normals(200)));
    const Vec start(m->minimizer().begin(), m->minimizer().end());
    const Vec ratios{1.05, 1.2};
    FptSgdConfig cfg;
    cfg.lr = 0.2;
    cfg.runs = 12;
    cfg.max_steps = 200000;
    const RngStream rng(31);
    const auto a = first_passage_times(*m, start, m->min_loss(), ratios, cfg, rng);
    const auto b = first_passage_times(*m, start, m->min_loss(), ratios, cfg, rng);
    REQUIRE(a.size() == 2);
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        CHECK(a[0].runs[r].t_p == b[0].runs[r].t_p);
        if (!a[1].runs[r].censored) CHECK(a[0].runs[r].t_p <= a[1].runs[r].t_p);
    }
    CHECK(a[0].mean <= a[1].mean);
    std::ostringstream out;
    write_fpt_csv(a, out);
    CHECK(out.str().rfind("run_id,c,t_p,censored\n", 0) == 0);
}

TEST_CASE("unreached thresholds throw or report NaN") {
    testgen::Gen g(6);
    auto m = linreg_model(std::make_shared<const Dataset>(1, g.normals(50), g.normals(50)));
    const Vec start(m->minimizer().begin(), m->minimizer().end());
    const Vec ratios{1e6};
    FptSgdConfig cfg;
    cfg.lr = 0.01;
    cfg.runs = 3;
    cfg.max_steps = 100;
    CHECK_THROWS_AS(first_passage_times(*m, start, m->min_loss(), ratios, cfg, RngStream(1)), EscapeNotObservedError);
    cfg.throw_if_unobserved = false;
    const auto res = first_passage_times(*m, start, m->min_loss(), ratios, cfg, RngStream(1));
    CHECK(res[0].censored_count == 3);
    CHECK(std::isnan(res[0].mean));
    CHECK_THROWS_AS(first_passage_times(*m, start, m->min_loss(), Vec{0.5}, cfg, RngStream(1)), InputError);
}

TEST_CASE("first_passage_sde counts steps on the scaled clock") {
    SdeProcess p;
    p.dim = 1;
    p.drift = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    p.loss = [](std::span<const double> x) { return 1.0 + x[0] * x[0]; };
    FptSdeConfig cfg;
    cfg.dt = 0.01;
    cfg.runs = 2;
    cfg.max_steps = 1000;
    cfg.time_scale = 4.0;
    const FptResult r = first_passage_sde(p, Vec{0.0}, [](std::span<const double> x) { return x[0] >= 0.995; }, cfg,
                                          RngStream(2));
    CHECK(r.censored_count == 0);
    CHECK(r.mean == doctest::Approx(4.0));

    auto well = double_well(1.0, 1.0, 0.5);
    const EscapePredicate above = level_set_criterion(*well, 1.0);
    CHECK(above(Vec{0.0}));
    CHECK(!above(Vec{1.0}));
}

TEST_CASE("empirical escape rate of exponential passage times") {
    testgen::Gen g(8);
    FptResult fpt;
    const double kappa = 2.5;
    for (int i = 0; i < 20000; ++i) fpt.runs.push_back({-std::log(1.0 - g.uniform(0.0, 1.0)) / kappa, false});
    fpt.runs.push_back({0.0, true});
    const EscapeRate r = empirical_escape_rate(fpt);
    CHECK(r.passages == 20000);
    CHECK(std::abs(r.kappa - kappa) < 4.0 * r.se);
    CHECK(r.se == doctest::Approx(kappa / std::sqrt(20000.0)).epsilon(0.05));
    FptResult few;
    few.runs.assign(10, FptRun{1.0, false});
    CHECK_THROWS_AS(empirical_escape_rate(few), InputError);
}
