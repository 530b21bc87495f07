#include "sgdlab/cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "sgdlab/analysis/analysis.hpp"
#include "sgdlab/escape/escape.hpp"
#include "sgdlab/models/dataset.hpp"
#include "sgdlab/models/linreg.hpp"
#include "sgdlab/models/mlp.hpp"
#include "sgdlab/models/potentials.hpp"
#include "sgdlab/numerics/stats.hpp"
#include "sgdlab/sde/sde.hpp"
#include "sgdlab/sgd/sgd.hpp"

namespace sgdlab::cli {

std::optional<double> Summary::deviation() const {
    if (!theory || !std::isfinite(value)) return std::nullopt;
    const double diff = std::abs(value - *theory);
    return *theory == 0.0 ? diff : diff / std::abs(*theory);
}

void RunOutputs::write_text(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
    if (!out) throw InputError("write failed: " + path.string());
    artifacts_.push_back(name);
}

void RunOutputs::write_csv(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    body(ss);
    write_text(name, ss.str());
}

void RunOutputs::write_json(const std::string& name, const Json& value) { write_text(name, value.dump(2) + "\n"); }

void RunOutputs::write_svg(const std::string& name, const PlotSpec& spec) { write_text(name, render_svg(spec)); }

namespace {

std::string fd(double v) { return format_double(v); }

// Guide line of the given slope through the centroid of the points in log space.
ReferenceLine guide_through(std::span<const double> xs, std::span<const double> ys, double slope, std::string label) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
        sx += std::log(xs[i]);
        sy += std::log(ys[i]);
        ++n;
    }
    ReferenceLine ref;
    ref.slope = slope;
    ref.intercept = n == 0 ? 0.0 : (sy - slope * sx) / static_cast<double>(n);
    ref.label = std::move(label);
    return ref;
}

// ---- model sections ----

struct LinregSpec {
    std::size_t d = 1;
    std::size_t n = 10000;
};

LinregSpec read_linreg(Section& model) {
    model.text("kind", "linreg", {"linreg"});
    LinregSpec s;
    s.d = model.integer("d", 1, 1, 4096);
    s.n = model.integer("n", 10000, 2, 100000000);
    return s;
}

std::shared_ptr<LinearRegression> build_linreg(const LinregSpec& s, std::uint64_t seed) {
    RngStream rng(seed, kDataStream);
    return linreg_model(std::make_shared<const Dataset>(linreg_generate(s.d, s.n, rng)));
}

struct MlpSpec {
    std::size_t d = 10;
    std::size_t n = 1000;
    std::vector<std::uint64_t> hidden{100, 100};
    std::string activation = "relu";
    bool bias = true;
};

MlpSpec read_mlp(Section& model) {
    model.text("kind", "mlp", {"mlp"});
    MlpSpec s;
    s.d = model.integer("d", 10, 1, 4096);
    s.n = model.integer("n", 1000, 2, 1000000);
    s.hidden = model.integers("hidden", s.hidden, 1);
    s.activation = model.text("activation", "relu", {"relu", "tanh", "identity"});
    s.bias = model.integer("bias", 1, 0, 1) == 1;
    return s;
}

MlpInstance build_mlp(const MlpSpec& s, std::uint64_t seed) {
    RngStream data_rng(seed, kDataStream);
    auto data = std::make_shared<const Dataset>(binary_teacher_generate(s.d, s.n, data_rng));
    std::vector<std::size_t> widths{s.d};
    for (auto h : s.hidden) widths.push_back(h);
    widths.push_back(1);
    RngStream init_rng(seed, kInitStream);
    return mlp_model(widths, parse_activation(s.activation), data, init_rng, s.bias);
}

std::size_t read_batch(Section& opt, std::size_t fallback, std::size_t n) {
    // Bound by the sample count so B > N is a field-level error.
    const std::size_t b = opt.integer("batch", fallback, 1);
    if (b > n) {
        throw ConfigError(opt.field("batch"), "B = " + std::to_string(b) + " exceeds the sample count N = " + std::to_string(n));
    }
    return b;
}

void check_diverged(const Trajectory& traj) {
    if (traj.diverged) throw DivergedError(traj.failure.empty() ? "SGD diverged" : traj.failure);
}

// ---- gen-data ----

Experiment prepare_gen_data(Section& root, std::uint64_t seed) {
    Section model = root.child("model");
    const std::string kind = model.text("kind", "linreg", {"linreg", "teacher"});
    const std::size_t d = model.integer("d", 1, 1, 4096);
    const std::size_t n = model.integer("n", 10000, 1, 100000000);
    model.finish();
    root.finish();
    return [=](RunOutputs& out) {
        RngStream rng(seed, kDataStream);
        const Dataset data = kind == "linreg" ? linreg_generate(d, n, rng) : binary_teacher_generate(d, n, rng);
        out.write_csv("data.csv", [&](std::ostream& os) { write_csv(data, os); });
        const MeanSe ms = mean_se(data.labels());
        out.metrics["kind"] = kind;
        out.metrics["d"] = d;
        out.metrics["n"] = n;
        out.metrics["label_mean"] = ms.mean;
        out.summary = Summary{"label_mean", ms.mean, 0.0};
    };
}

// ---- stationary-fit ----

Experiment prepare_stationary_fit(Section& root, std::uint64_t seed) {
    Section model = root.child("model");
    const LinregSpec spec = read_linreg(model);
    if (spec.d != 1) throw ConfigError(model.field("d"), "stationary-fit needs d = 1");
    Section opt = root.child("optimizer");
    const double lr = opt.number("lr", 0.1, 1e-12, 10.0);
    const std::size_t batch = read_batch(opt, 1, spec.n);
    const std::uint64_t steps = opt.integer("steps", 1000000, 1);
    const std::uint64_t every = opt.integer("record_every", 100, 1);
    Section an = root.child("analysis");
    PowerLawFitOptions fit_opts;
    fit_opts.bins = an.integer("bins", fit_opts.bins, 2, 100000);
    fit_opts.central_mass = an.number("central_mass", fit_opts.central_mass, 1e-6, 1.0);
    fit_opts.min_count = an.integer("min_count", fit_opts.min_count, 1);
    fit_opts.min_samples = an.integer("min_samples", fit_opts.min_samples, 2);
    const double burn_in = an.number("burn_in", 0.0, 0.0, 0.99);
    for (Section* s : {&model, &opt, &an}) s->finish();
    root.finish();

    return [=](RunOutputs& out) {
        auto m = build_linreg(spec, seed);
        const double h_star = m->gram()(0, 0);
        const double phi_theory = theory_phi(static_cast<double>(batch), lr, h_star);
        out.metrics["h_star"] = h_star;
        out.metrics["L_min"] = m->min_loss();
        out.metrics["phi_theory"] = phi_theory;

        RngStream rng(seed, kDynamicsStream);
        SgdConfig cfg{lr, batch, steps, every, false, true};
        const Trajectory traj = run_sgd(*m, m->minimizer(), cfg, rng);
        out.write_csv("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(traj, os); });
        check_diverged(traj);

        const Vec samples = stationary_samples(traj, 0, burn_in);
        out.metrics["samples"] = samples.size();
        const PowerLawFit fit = fit_power_law(samples, *m, fit_opts);
        out.write_csv("histogram.csv", [&](std::ostream& os) {
            os << "bin_lo,bin_hi,center,loss,count,density\n";
            for (std::size_t b = 0; b < fit.hist.bins(); ++b) {
                const double c = fit.hist.center(b);
                os << fd(fit.hist.bin_edges[b]) << ',' << fd(fit.hist.bin_edges[b + 1]) << ',' << fd(c) << ','
                   << fd(m->loss(std::span<const double>(&c, 1))) << ',' << fit.hist.counts[b] << ','
                   << fd(static_cast<double>(fit.hist.counts[b]) / fit.hist.width(b)) << '\n';
            }
        });
        out.write_csv("fit_points.csv", [&](std::ostream& os) {
            os << "loss,density\n";
            for (std::size_t i = 0; i < fit.bin_loss.size(); ++i) {
                os << fd(fit.bin_loss[i]) << ',' << fd(fit.bin_density[i]) << '\n';
            }
        });
        PlotSpec ps;
        ps.kind = PlotKind::loglog_scatter;
        ps.title = "Stationary density vs loss";
        ps.x_label = "L(theta)";
        ps.y_label = "count / bin width";
        ps.series.push_back({"SGD samples", fit.bin_loss, fit.bin_density});
        ps.reference = guide_through(fit.bin_loss, fit.bin_density, -phi_theory, "slope -" + fd(phi_theory));
        out.write_svg("stationary.svg", ps);

        out.metrics["phi_hat"] = fit.phi_hat;
        out.metrics["ci_low"] = fit.ci_low;
        out.metrics["ci_high"] = fit.ci_high;
        out.metrics["r2"] = fit.r2;
        out.metrics["bins_used"] = fit.bins_used;
        out.summary = Summary{"phi_hat", fit.phi_hat, phi_theory};
    };
}

// ---- fpt ----

Experiment prepare_fpt(Section& root, std::uint64_t seed) {
    Section model = root.child("model");
    const LinregSpec spec = read_linreg(model);
    Section opt = root.child("optimizer");
    FptSgdConfig cfg;
    cfg.lr = opt.number("lr", 0.1, 1e-12, 10.0);
    cfg.batch = read_batch(opt, 1, spec.n);
    cfg.max_steps = opt.integer("max_steps", 10000000, 1);
    cfg.runs = opt.integer("runs", 100, 1, 1000000);
    cfg.throw_if_unobserved = false;
    Section an = root.child("analysis");
    Vec ratios = an.numbers("ratios", {1.5, 2.0, 3.0, 4.0}, 1.0 + 1e-12);
    std::sort(ratios.begin(), ratios.end());
    const std::optional<double> h_given =
        an.has("h_star") ? std::optional<double>(an.number("h_star", 1.0, 1e-12)) : std::nullopt;
    for (Section* s : {&model, &opt, &an}) s->finish();
    root.finish();

    return [=](RunOutputs& out) {
        auto m = build_linreg(spec, seed);
        // Default h*: mean Gram eigenvalue (all of them are ~1 for Gaussian inputs).
        const double h_star = h_given ? *h_given : m->gram().trace() / static_cast<double>(spec.d);
        const double theory = static_cast<double>(cfg.batch) / (cfg.lr * h_star) + 1.0 - 0.5 * spec.d;
        out.metrics["h_star"] = h_star;
        out.metrics["h_star_source"] = h_given ? "config" : "mean_gram_eigenvalue";
        out.metrics["L_min"] = m->min_loss();
        out.metrics["slope_theory"] = theory;

        const auto results = first_passage_times(*m, m->minimizer(), m->min_loss(), ratios, cfg,
                                                 RngStream(seed, kDynamicsStream));
        out.write_csv("fpt.csv", [&](std::ostream& os) { write_fpt_csv(results, os); });
        out.write_csv("fpt_summary.csv", [&](std::ostream& os) {
            os << "c,mean,se,median,censored,runs\n";
            for (const auto& r : results) {
                os << fd(r.c) << ',' << fd(r.mean) << ',' << fd(r.se) << ',' << fd(r.median) << ','
                   << r.censored_count << ',' << r.runs.size() << '\n';
            }
        });
        Json per_c = Json::array();
        Vec cs, means;
        for (const auto& r : results) {
            per_c.push_back({{"c", r.c}, {"mean", r.mean}, {"se", r.se}, {"censored", r.censored_count}});
            if (std::isfinite(r.mean)) {
                cs.push_back(r.c);
                means.push_back(r.mean);
            }
        }
        out.metrics["thresholds"] = per_c;
        for (const auto& r : results) {
            if (r.censored_count == r.runs.size()) {
                throw EscapeNotObservedError("fpt: no run reached c = " + fd(r.c) + " within " +
                                             std::to_string(cfg.max_steps) + " steps");
            }
        }
        PlotSpec ps;
        ps.kind = PlotKind::loglog_scatter;
        ps.title = "Mean first-passage time vs c";
        ps.x_label = "c";
        ps.y_label = "mean t_p";
        ps.series.push_back({"SGD", cs, means});
        ps.reference = guide_through(cs, means, theory, "slope " + fd(theory));
        out.write_svg("fpt.svg", ps);
        const LogLogFit ll = loglog_fit(cs, means);
        out.metrics["slope"] = ll.slope;
        out.metrics["slope_se"] = ll.slope_se;
        out.summary = Summary{"fpt_slope", ll.slope, theory};
    };
}

// ---- noise-scaling ----

Experiment prepare_noise_scaling(Section& root, std::uint64_t seed) {
    Section model = root.child("model");
    const MlpSpec spec = read_mlp(model);
    Section opt = root.child("optimizer");
    const double lr = opt.number("lr", 0.1, 1e-12, 10.0);
    const std::size_t batch = read_batch(opt, 100, spec.n);
    const std::uint64_t steps = opt.integer("steps", 20000, 1);
    const std::uint64_t every = opt.integer("record_every", 10, 1);
    Section an = root.child("analysis");
    const double fraction = an.number("fit_fraction", 0.5, 1e-6, 1.0);
    for (Section* s : {&model, &opt, &an}) s->finish();
    root.finish();

    return [=](RunOutputs& out) {
        MlpInstance inst = build_mlp(spec, seed);
        out.metrics["params"] = inst.model->dim();
        RngStream rng(seed, kDynamicsStream);
        SgdConfig cfg{lr, batch, steps, every, true, false};
        const Trajectory traj = run_sgd(*inst.model, inst.theta0, cfg, rng);
        out.write_csv("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(traj, os); });
        check_diverged(traj);

        const std::size_t first = traj.size() - std::max<std::size_t>(
                                                    2, static_cast<std::size_t>(fraction * traj.size()));
        const Vec losses(traj.losses.begin() + first, traj.losses.end());
        const Vec noise(traj.noise_strengths.begin() + first, traj.noise_strengths.end());
        const LogLogFit ll = loglog_fit(losses, noise);
        PlotSpec ps;
        ps.kind = PlotKind::loglog_scatter;
        ps.title = "Noise strength vs loss";
        ps.x_label = "L(theta)";
        ps.y_label = "noise strength";
        ps.series.push_back({"all records", traj.losses, traj.noise_strengths});
        ps.reference = guide_through(losses, noise, 1.0, "slope 1");
        out.write_svg("noise.svg", ps);
        out.metrics["slope"] = ll.slope;
        out.metrics["slope_se"] = ll.slope_se;
        out.metrics["r2"] = ll.r2;
        out.metrics["points"] = ll.points;
        out.metrics["final_loss"] = traj.losses.back();
        out.summary = Summary{"noise_slope", ll.slope, 1.0};
    };
}

// ---- decoupling ----

Experiment prepare_decoupling(Section& root, std::uint64_t seed) {
    Section model = root.child("model");
    const MlpSpec spec = read_mlp(model);
    Section opt = root.child("optimizer");
    const double lr = opt.number("lr", 0.01, 1e-12, 10.0);
    const std::size_t batch = read_batch(opt, 100, spec.n);
    Section an = root.child("analysis");
    std::vector<std::uint64_t> checkpoints = an.integers("checkpoints", {0, 500, 5000});
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    const double eps_rel = an.number("eps_rel", 1e-2, 0.0, 1.0);
    const double eps_abs = an.number("eps_abs", 1e-8, 0.0);
    for (Section* s : {&model, &opt, &an}) s->finish();
    root.finish();

    return [=](RunOutputs& out) {
        MlpInstance inst = build_mlp(spec, seed);
        const RngStream base(seed, kDynamicsStream);
        Vec theta = inst.theta0;
        std::uint64_t at = 0;
        Json rows = Json::array();
        double worst = 0.0;
        Vec last_exact, last_decoupled;
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            if (checkpoints[i] > at) {
                RngStream rng = base.substream(i);
                SgdConfig cfg{lr, batch, checkpoints[i] - at, checkpoints[i] - at, false, false};
                Trajectory traj = run_sgd(*inst.model, theta, cfg, rng);
                check_diverged(traj);
                theta = std::move(traj.final_theta);
                at = checkpoints[i];
            }
            const DecouplingReport rep = decoupling_check(theta, *inst.model);
            const std::string tag = "k" + std::to_string(at);
            out.write_csv("spectrum_" + tag + "_exact.csv",
                          [&](std::ostream& os) { write_spectrum_csv(rep.exact_spectrum.eigenvalues, os); });
            out.write_csv("spectrum_" + tag + "_decoupled.csv",
                          [&](std::ostream& os) { write_spectrum_csv(rep.decoupled_spectrum.eigenvalues, os); });
            const EffectiveDimension ed = effective_dimension(rep.exact_spectrum.eigenvalues, eps_rel, eps_abs);
            rows.push_back({{"step", at},
                            {"loss", rep.loss},
                            {"overlap", rep.overlap},
                            {"dual", rep.dual},
                            {"effective_dimension", ed.n}});
            out.metrics["checkpoints"] = rows;
            worst = std::max(worst, rep.overlap);
            last_exact = rep.exact_spectrum.eigenvalues;
            last_decoupled = rep.decoupled_spectrum.eigenvalues;
        }
        PlotSpec ps;
        ps.kind = PlotKind::loglog_scatter;
        ps.title = "Decoupled vs exact eigenvalues at step " + std::to_string(at);
        ps.x_label = "exact eigenvalue";
        ps.y_label = "decoupled eigenvalue";
        const std::size_t k = std::min(last_exact.size(), last_decoupled.size());
        ps.series.push_back({"rank-matched pairs", Vec(last_exact.begin(), last_exact.begin() + k),
                             Vec(last_decoupled.begin(), last_decoupled.begin() + k)});
        ps.reference = ReferenceLine{1.0, 0.0, "y = x"};
        out.write_csv("decoupling_pairs.csv", [&](std::ostream& os) {
            os << "rank,exact,decoupled\n";
            for (std::size_t r = 0; r < k; ++r) os << r + 1 << ',' << fd(last_exact[r]) << ',' << fd(last_decoupled[r]) << '\n';
        });
        out.write_svg("decoupling.svg", ps);
        out.metrics["max_overlap"] = worst;
        out.summary = Summary{"max_decile_overlap", worst, std::nullopt};
    };
}

// ---- escape experiments ----

struct EscapeSde {
    double temperature = 0.3;
    double batch = 1.0;
    double dt_scale = 0.01;
    std::uint64_t max_steps = 100000000;
    std::size_t runs = 500;
};

EscapeSde read_escape_sde(Section& sde) {
    EscapeSde s;
    s.temperature = sde.number("temperature", s.temperature, 1e-6, 100.0);
    s.batch = sde.number("batch", s.batch, 1.0);
    s.dt_scale = sde.number("dt_scale", s.dt_scale, 1e-8, 1.0);
    s.max_steps = sde.integer("max_steps", s.max_steps, 1);
    s.runs = sde.integer("runs", s.runs, 30, 10000000);
    return s;
}

Experiment prepare_kramers_1d(Section& root, std::uint64_t seed) {
    Section model = root.child("model");
    model.text("kind", "double_well", {"double_well"});
    const double a = model.number("a", 1.0, 1e-12);
    const double w = model.number("w", 1.0, 1e-12);
    Section sde = root.child("sde");
    const EscapeSde es = read_escape_sde(sde);
    Section an = root.child("analysis");
    Vec ratios = an.numbers("ratios", {3.0, 10.0}, 1.0 + 1e-12);
    std::sort(ratios.begin(), ratios.end());
    for (Section* s : {&model, &sde, &an}) s->finish();
    root.finish();

    return [=](RunOutputs& out) {
        const double h_star = 8.0 * a * w * w;
        const double lr = es.temperature * es.batch / h_star;
        const double exponent_theory = 0.5 + es.batch / (lr * h_star);
        out.metrics["h_star"] = h_star;
        out.metrics["lr"] = lr;
        out.metrics["exponent_theory"] = exponent_theory;
        const RngStream base(seed, kDynamicsStream);
        std::vector<FptResult> fpts;
        Json rows = Json::array();
        Vec cs, kappas, theories;
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            const double c = ratios[i];
            const double L0 = offset_for_ratio(a, w, c);
            auto well = double_well(a, w, L0);
            const SdeProcess proc = log_landscape_process(*well, lr, es.batch, h_star);
            FptSdeConfig fc;
            // Step in tau scaled by the log-landscape curvature h*/L0 at the minimum.
            fc.dt = es.dt_scale * L0 / h_star;
            fc.max_steps = es.max_steps;
            fc.runs = es.runs;
            fc.time_scale = 1.0 / L0;
            const Vec start{w};
            const double target = -w;
            FptResult r = first_passage_sde(
                proc, start, [target](std::span<const double> th) { return th[0] <= target; }, fc,
                base.substream(i));
            r.c = c;
            fpts.push_back(r);
            const EscapeRate er = empirical_escape_rate(r);
            const EscapeGeometry geom{L0, L0 + a * std::pow(w, 4), h_star, -4.0 * a * w * w, 1, 1.0};
            const double theory = kramers_rate_1d(geom, es.batch, lr);
            rows.push_back({{"c", c},
                            {"kappa_hat", er.kappa},
                            {"kappa_se", er.se},
                            {"kappa_theory", theory},
                            {"ratio", er.kappa / theory},
                            {"escapes", er.passages},
                            {"censored", r.censored_count}});
            out.metrics["rates"] = rows;
            cs.push_back(c);
            kappas.push_back(er.kappa);
            theories.push_back(theory);
        }
        out.write_csv("fpt.csv", [&](std::ostream& os) { write_fpt_csv(fpts, os); });
        out.write_csv("rates.csv", [&](std::ostream& os) {
            os << "c,kappa_hat,kappa_theory\n";
            for (std::size_t i = 0; i < cs.size(); ++i) os << fd(cs[i]) << ',' << fd(kappas[i]) << ',' << fd(theories[i]) << '\n';
        });
        PlotSpec ps;
        ps.kind = PlotKind::loglog_scatter;
        ps.title = "Escape rate vs loss ratio";
        ps.x_label = "c";
        ps.y_label = "kappa";
        ps.series.push_back({"simulated", cs, kappas});
        ps.series.push_back({"theory", cs, theories});
        ps.reference = guide_through(cs, theories, -exponent_theory, "slope -" + fd(exponent_theory));
        out.write_svg("kramers.svg", ps);
        double worst = 0.0;
        for (std::size_t i = 0; i < cs.size(); ++i) worst = std::max(worst, std::abs(std::log(kappas[i] / theories[i])));
        out.metrics["max_abs_log_ratio"] = worst;
        if (cs.size() >= 2) {
            const LogLogFit ll = loglog_fit(cs, kappas);
            out.metrics["exponent_hat"] = -ll.slope;
            out.summary = Summary{"kramers_exponent", -ll.slope, exponent_theory};
        } else {
            out.summary = Summary{"kappa_hat", kappas[0], theories[0]};
        }
    };
}

Experiment prepare_langer_nd(Section& root, std::uint64_t seed) {
    Section model = root.child("model");
    model.text("kind", "separable_double_well", {"separable_double_well"});
    const double a = model.number("a", 1.0, 1e-12);
    const double w = model.number("w", 1.0, 1e-12);
    const double c = model.number("c", 5.0, 1.0 + 1e-12);
    const Vec transverse = model.numbers("transverse", {2.0}, 1e-12);
    Section sde = root.child("sde");
    const EscapeSde es = read_escape_sde(sde);
    for (Section* s : {&model, &sde}) s->finish();
    root.finish();

    return [=](RunOutputs& out) {
        const std::size_t dim = transverse.size() + 1;
        const double h_e = 8.0 * a * w * w;
        const double lr = es.temperature * es.batch / h_e;
        const double L0 = offset_for_ratio(a, w, c);
        auto well = nd_double_well(dim, 0, a, w, L0, transverse);
        Vec diag{h_e};
        diag.insert(diag.end(), transverse.begin(), transverse.end());
        const SymMatrix H = SymMatrix::diagonal(diag);
        const SdeProcess proc = log_landscape_process(*well, lr, es.batch, H);
        FptSdeConfig fc;
        fc.dt = es.dt_scale * L0 / *std::max_element(diag.begin(), diag.end());
        fc.max_steps = es.max_steps;
        fc.runs = es.runs;
        fc.time_scale = 1.0 / L0;
        Vec start(dim, 0.0);
        start[0] = w;
        const double target = -w;
        FptResult r = first_passage_sde(
            proc, start, [target](std::span<const double> th) { return th[0] <= target; }, fc,
            RngStream(seed, kDynamicsStream));
        r.c = c;
        out.write_csv("fpt.csv", [&](std::ostream& os) { write_fpt_csv(std::span<const FptResult>(&r, 1), os); });
        const EscapeRate er = empirical_escape_rate(r);
        // Transverse curvatures cancel between det H(min) and |det H(saddle)|.
        const EscapeGeometry geom{L0, L0 + a * std::pow(w, 4), h_e, -4.0 * a * w * w, dim, 2.0};
        const LangerRate theory = langer_rate_multi(geom, es.batch, lr);
        out.metrics["dim"] = dim;
        out.metrics["lr"] = lr;
        out.metrics["kappa_hat"] = er.kappa;
        out.metrics["kappa_se"] = er.se;
        out.metrics["kappa_theory"] = theory.kappa;
        out.metrics["exponent_theory"] = theory.exponent;
        out.metrics["escapes"] = er.passages;
        out.metrics["ratio"] = er.kappa / theory.kappa;
        out.summary = Summary{"kappa_hat", er.kappa, theory.kappa};
    };
}

// ---- sde-consistency ----

Experiment prepare_sde_consistency(Section& root, std::uint64_t seed) {
    Section model = root.child("model");
    model.text("kind", "quadratic", {"quadratic"});
    const double h = model.number("h", 1.0, 1e-12);
    const double L0 = model.number("L0", 1.0, 1e-12);
    Section opt = root.child("optimizer");
    const double lr = opt.number("lr", 0.1, 1e-12, 10.0);
    const double batch = opt.number("batch", 1.0, 1.0);
    Section sde = root.child("sde");
    const double dt = sde.number("dt", 0.01, 1e-9, 1.0);
    const std::uint64_t steps = sde.integer("steps", 1000000, 1);
    const std::uint64_t every = sde.integer("record_every", 100, 1);
    Section an = root.child("analysis");
    const double burn_in = an.number("burn_in", 0.2, 0.0, 0.99);
    const std::size_t bins = an.integer("bins", 60, 2, 100000);
    for (Section* s : {&model, &opt, &sde, &an}) s->finish();
    root.finish();

    return [=](RunOutputs& out) {
        auto well = nd_quadratic_well({h}, L0);
        SdeConfig cfg;
        cfg.dt = dt;
        cfg.steps = steps;
        cfg.theta0 = {0.0};
        cfg.record_every = every;
        RngStream rng_t(seed, kDynamicsStream), rng_tau(seed, kAuxStream);
        const Trajectory t_traj = sgd_sde(*well, lr, batch, SymMatrix::diagonal(Vec{h}), cfg, rng_t);
        const Trajectory tau_traj = log_landscape_langevin(*well, lr, batch, h, cfg, rng_tau);
        check_diverged(t_traj);
        check_diverged(tau_traj);
        const Vec a = stationary_samples(t_traj, 0, burn_in);
        const Vec b = stationary_samples(tau_traj, 0, burn_in);
        const Vec wa(a.size(), 1.0);
        Vec wb(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) wb[i] = 1.0 / well->loss(std::span<const double>(&b[i], 1));
        const double ks = ks_distance(a, wa, b, wb);

        const double lo = std::min(quantile(a, 0.001), quantile(b, 0.001));
        const double hi = std::max(quantile(a, 0.999), quantile(b, 0.999));
        const Vec edges = uniform_edges(lo, hi, bins);
        const Histogram ha = histogram(a, edges);
        Vec dens_a(bins), dens_b(bins), centers(bins);
        double wb_total = std::accumulate(wb.begin(), wb.end(), 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (b[i] < lo || b[i] > hi) continue;
            const auto k = std::min<std::size_t>(bins - 1, static_cast<std::size_t>((b[i] - lo) / (hi - lo) * bins));
            dens_b[k] += wb[i];
        }
        for (std::size_t k = 0; k < bins; ++k) {
            centers[k] = ha.center(k);
            dens_a[k] = static_cast<double>(ha.counts[k]) / (static_cast<double>(a.size()) * ha.width(k));
            dens_b[k] /= wb_total * ha.width(k);
        }
        out.write_csv("densities.csv", [&](std::ostream& os) {
            os << "center,t_density,tau_reweighted_density\n";
            for (std::size_t k = 0; k < bins; ++k) os << fd(centers[k]) << ',' << fd(dens_a[k]) << ',' << fd(dens_b[k]) << '\n';
        });
        PlotSpec ps;
        ps.kind = PlotKind::histogram;
        ps.title = "t-process vs reweighted tau-process";
        ps.x_label = "theta";
        ps.y_label = "density";
        ps.series.push_back({"t-process", centers, dens_a});
        ps.series.push_back({"tau-process / L", centers, dens_b});
        out.write_svg("densities.svg", ps);
        out.metrics["ks"] = ks;
        out.metrics["samples_t"] = a.size();
        out.metrics["samples_tau"] = b.size();
        out.summary = Summary{"ks_distance", ks, 0.0};
    };
}

}  // namespace

Experiment prepare_experiment(const ExperimentConfig& config) {
    Section root(&config.document, "");
    root.skip("experiment");
    root.skip("seed");
    root.skip("output_dir");
    const std::uint64_t seed = config.seed;
    const std::string& kind = config.experiment;
    if (kind == "gen-data") return prepare_gen_data(root, seed);
    if (kind == "stationary-fit") return prepare_stationary_fit(root, seed);
    if (kind == "fpt") return prepare_fpt(root, seed);
    if (kind == "noise-scaling") return prepare_noise_scaling(root, seed);
    if (kind == "decoupling") return prepare_decoupling(root, seed);
    if (kind == "kramers-1d") return prepare_kramers_1d(root, seed);
    if (kind == "langer-nd") return prepare_langer_nd(root, seed);
    if (kind == "sde-consistency") return prepare_sde_consistency(root, seed);
    throw ConfigError("experiment", "unknown kind '" + kind + "'");
}

}  // namespace sgdlab::cli
