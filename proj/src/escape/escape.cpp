#include "sgdlab/escape/escape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/kernels.hpp"
#include "sgdlab/numerics/parallel.hpp"
#include "sgdlab/sgd/sgd.hpp"
#include "sgdlab/trajectory.hpp"

namespace sgdlab {

void EscapeGeometry::validate() const {
    if (!(L_min > 0.0)) throw InputError("escape geometry: L_min must be > 0");
    if (!(L_saddle > L_min)) throw InputError("escape geometry: L_saddle must exceed L_min");
    if (!(h_star > 0.0)) throw InputError("escape geometry: h_star must be > 0");
    if (!(h_e_saddle < 0.0)) throw InputError("escape geometry: h_e_saddle must be < 0");
    if (n < 1) throw InputError("escape geometry: n must be >= 1");
    if (!(det_ratio > 0.0)) throw InputError("escape geometry: det_ratio must be > 0");
}

namespace {

void require_positive(double batch, double lr, double h_star) {
    if (!(batch > 0.0) || !(lr > 0.0) || !(h_star > 0.0)) throw InputError("B, eta and h* must be positive");
}

}  // namespace

double theory_phi(double batch, double lr, double h_star) {
    require_positive(batch, lr, h_star);
    return 1.0 + batch / (lr * h_star);
}

double kramers_rate_1d(const EscapeGeometry& geom, double batch, double lr) {
    require_positive(batch, lr, geom.h_star);
    // c = 1 is the degenerate no-barrier limit; allow it here.
    if (!(geom.L_min > 0.0) || geom.L_saddle < geom.L_min || !(geom.h_e_saddle < 0.0)) geom.validate();
    const double prefactor = std::sqrt(geom.h_star * std::abs(geom.h_e_saddle)) / (2.0 * std::numbers::pi);
    return prefactor * std::pow(geom.ratio(), -(0.5 + batch / (lr * geom.h_star)));
}

LangerRate langer_rate_multi(const EscapeGeometry& geom, double batch, double lr) {
    require_positive(batch, lr, geom.h_star);
    if (!(geom.L_min > 0.0) || geom.L_saddle < geom.L_min || !(geom.h_e_saddle < 0.0) || geom.n < 1 ||
        !(geom.det_ratio > 0.0)) {
        geom.validate();
    }
    LangerRate r;
    const double s = batch / (lr * geom.h_star);
    const double n = static_cast<double>(geom.n);
    r.exponent = s + 1.0 - 0.5 * n;
    r.unstable = n >= stability_max_dim(batch, lr, geom.h_star);
    r.kappa = std::abs(geom.h_e_saddle) / (2.0 * std::numbers::pi) * std::sqrt(geom.det_ratio) *
              std::pow(geom.ratio(), -r.exponent);
    return r;
}

double stability_max_dim(double batch, double lr, double h_star) {
    require_positive(batch, lr, h_star);
    return 2.0 * (batch / (lr * h_star) + 1.0);
}

PowerLawFit fit_power_law(std::span<const double> samples, const std::function<double(double)>& loss_at,
                          const PowerLawFitOptions& options) {
    if (samples.size() < options.min_samples) {
        throw InputError("fit_power_law: need at least " + std::to_string(options.min_samples) + " samples, got " +
                         std::to_string(samples.size()));
    }
    if (!(options.central_mass > 0.0 && options.central_mass <= 1.0) || options.bins < 2) {
        throw InputError("fit_power_law: bad binning options");
    }
    const double tail = 0.5 * (1.0 - options.central_mass);
    const double lo = quantile(samples, tail);
    const double hi = quantile(samples, 1.0 - tail);
    if (!(lo < hi)) throw FitError("fit_power_law: samples have no spread");

    PowerLawFit fit;
    const Vec edges = uniform_edges(lo, hi, options.bins);
    fit.hist = histogram(samples, edges);
    Vec xs, ys, ws;
    for (std::size_t b = 0; b < fit.hist.bins(); ++b) {
        const std::uint64_t count = fit.hist.counts[b];
        if (count < options.min_count) continue;
        const double loss = loss_at(fit.hist.center(b));
        if (!(loss > 0.0)) throw PositivityError("fit_power_law: L <= 0 at a bin center");
        xs.push_back(loss);
        ys.push_back(static_cast<double>(count) / fit.hist.width(b));
        ws.push_back(static_cast<double>(count));
    }
    if (xs.size() < 2) throw FitError("fit_power_law: fewer than two bins with enough counts");
    const LogLogFit ll = loglog_fit(xs, ys, ws);
    fit.phi_hat = -ll.slope;
    fit.slope_se = ll.slope_se;
    fit.r2 = ll.r2;
    fit.ci_low = fit.phi_hat - options.z * ll.slope_se;
    fit.ci_high = fit.phi_hat + options.z * ll.slope_se;
    fit.bins_used = xs.size();
    fit.bin_loss = std::move(xs);
    fit.bin_density = std::move(ys);
    return fit;
}

PowerLawFit fit_power_law(std::span<const double> samples, const Objective& model, const PowerLawFitOptions& options) {
    if (model.dim() != 1) throw DimensionError("fit_power_law: model must be one-dimensional");
    return fit_power_law(
        samples, [&model](double x) { return model.loss(std::span<const double>(&x, 1)); }, options);
}

Vec FptResult::passage_times() const {
    Vec out;
    for (const auto& r : runs) {
        if (!r.censored) out.push_back(r.t_p);
    }
    return out;
}

namespace {

void summarize(FptResult& res, bool throw_if_unobserved = true) {
    res.censored_count = 0;
    for (const auto& r : res.runs) res.censored_count += r.censored ? 1 : 0;
    const Vec t = res.passage_times();
    if (t.empty() && !throw_if_unobserved) {
        res.mean = res.se = res.median = std::nan("");
        return;
    }
    if (t.empty()) {
        throw EscapeNotObservedError("no run reached the escape criterion (c = " + format_double(res.c) + ", " +
                                     std::to_string(res.runs.size()) + " runs, time cap " +
                                     format_double(res.time_cap) + ")");
    }
    const MeanSe ms = mean_se(t);
    res.mean = ms.mean;
    res.se = ms.se;
    res.median = quantile(t, 0.5);
}

}  // namespace

std::vector<FptResult> first_passage_times(const LossModel& model, std::span<const double> theta_start,
                                           double min_loss, std::span<const double> ratios,
                                           const FptSgdConfig& config, const RngStream& rng) {
    const std::size_t n = model.sample_count();
    SgdConfig sgd{config.lr, config.batch, config.max_steps, 1, false, false};
    sgd.validate(n, /*allow_zero_lr=*/true);
    if (theta_start.size() != model.dim()) throw DimensionError("first_passage_times: theta_start has wrong dimension");
    if (!(min_loss > 0.0)) throw InputError("first_passage_times: L(theta*) must be > 0");
    if (ratios.empty()) throw InputError("first_passage_times: no thresholds");
    for (double c : ratios) {
        if (!(c > 1.0)) throw InputError("first_passage_times: every c must exceed 1");
    }
    if (config.runs < 1) throw InputError("first_passage_times: runs must be >= 1");

    const std::size_t nc = ratios.size();
    std::vector<FptResult> results(nc);
    for (std::size_t j = 0; j < nc; ++j) {
        results[j].c = ratios[j];
        results[j].time_cap = config.lr * static_cast<double>(config.max_steps);
        results[j].runs.resize(config.runs);
    }

    parallel_for(config.runs, [&](std::size_t r) {
        RngStream stream = rng.substream(r);
        Vec theta(theta_start.begin(), theta_start.end());
        Vec g(model.dim()), scratch;
        std::vector<std::size_t> batch;
        std::vector<bool> done(nc, false);
        std::size_t remaining = nc;
        auto check = [&](std::uint64_t k) {
            const double loss = model.loss(theta);
            if (!std::isfinite(loss) || std::abs(loss) > kDivergenceLoss) {
                throw DivergedError("first_passage_times: run " + std::to_string(r) + " diverged at step " +
                                    std::to_string(k));
            }
            for (std::size_t j = 0; j < nc; ++j) {
                if (!done[j] && loss >= ratios[j] * min_loss) {
                    done[j] = true;
                    --remaining;
                    results[j].runs[r] = {config.lr * static_cast<double>(k), false};
                }
            }
        };
        check(0);
        for (std::uint64_t k = 1; k <= config.max_steps && remaining > 0; ++k) {
            if (config.batch == 1) {
                // Same draw as sample_minibatch for B = 1.
                model.sample_grad(theta, static_cast<std::size_t>(stream.uniform_index(n)), g);
            } else {
                sample_minibatch(n, config.batch, stream, batch);
                model.batch_grad(theta, batch, g, scratch);
            }
            simd::axpy(-config.lr, g, theta);
            check(k);
        }
        for (std::size_t j = 0; j < nc; ++j) {
            if (!done[j]) results[j].runs[r] = {results[j].time_cap, true};
        }
    });

    for (auto& res : results) summarize(res, config.throw_if_unobserved);
    return results;
}

FptResult first_passage_sde(const SdeProcess& process, std::span<const double> theta_start,
                            const EscapePredicate& escaped, const FptSdeConfig& config, const RngStream& rng) {
    if (!(config.dt > 0.0) || !(config.time_scale > 0.0)) throw InputError("first_passage_sde: dt and time_scale must be > 0");
    if (config.runs < 1 || config.max_steps < 1) throw InputError("first_passage_sde: runs and max_steps must be >= 1");
    if (theta_start.size() != process.dim) throw DimensionError("first_passage_sde: theta_start has wrong dimension");

    FptResult res;
    res.c = std::nan("");
    res.time_cap = static_cast<double>(config.max_steps) * config.dt * config.time_scale;
    res.runs.resize(config.runs);
    parallel_for(config.runs, [&](std::size_t r) {
        RngStream stream = rng.substream(r);
        EulerMaruyama stepper(process, config.dt);
        Vec theta(theta_start.begin(), theta_start.end());
        res.runs[r] = {res.time_cap, true};
        if (escaped(theta)) {
            res.runs[r] = {0.0, false};
            return;
        }
        for (std::uint64_t k = 1; k <= config.max_steps; ++k) {
            stepper.step(theta, stream);
            if (!std::isfinite(theta[0])) {
                throw DivergedError("first_passage_sde: run " + std::to_string(r) + " diverged at step " +
                                    std::to_string(k));
            }
            if (escaped(theta)) {
                res.runs[r] = {static_cast<double>(k) * config.dt * config.time_scale, false};
                return;
            }
        }
    });
    summarize(res);
    return res;
}

EscapePredicate level_set_criterion(const Objective& model, double level) {
    return [&model, level](std::span<const double> theta) { return model.loss(theta) >= level; };
}

EscapeRate empirical_escape_rate(const FptResult& fpt) {
    const Vec t = fpt.passage_times();
    if (t.size() < 30) {
        throw InputError("empirical_escape_rate: need >= 30 passages, have " + std::to_string(t.size()));
    }
    const MeanSe ms = mean_se(t);
    EscapeRate er;
    er.passages = t.size();
    er.kappa = 1.0 / ms.mean;
    er.se = ms.se / (ms.mean * ms.mean);
    return er;
}

void write_fpt_csv(std::span<const FptResult> results, std::ostream& out) {
    out << "run_id,c,t_p,censored\n";
    for (const auto& res : results) {
        for (std::size_t r = 0; r < res.runs.size(); ++r) {
            out << r << ',' << format_double(res.c) << ',';
            if (!res.runs[r].censored) out << format_double(res.runs[r].t_p);
            out << ',' << (res.runs[r].censored ? 1 : 0) << '\n';
        }
    }
}

}  // namespace sgdlab
