#include "sgdlab/sgd/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/kernels.hpp"

namespace sgdlab {

void SgdConfig::validate(std::size_t n_samples, bool allow_zero_lr) const {
    if (!(lr > 0.0) && !(allow_zero_lr && lr == 0.0)) throw InputError("sgd: learning rate must be positive");
    if (!std::isfinite(lr)) throw InputError("sgd: learning rate must be finite");
    if (batch < 1 || batch > n_samples) {
        throw InputError("sgd: batch size " + std::to_string(batch) + " outside [1, " + std::to_string(n_samples) + "]");
    }
    if (steps < 1) throw InputError("sgd: steps must be >= 1");
    if (record_every < 1) throw InputError("sgd: record_every must be >= 1");
}

void sample_minibatch(std::size_t n, std::size_t batch, RngStream& rng, std::vector<std::size_t>& out) {
    if (batch < 1 || batch > n) {
        throw InputError("sample_minibatch: B=" + std::to_string(batch) + " must lie in [1, N=" + std::to_string(n) + "]");
    }
    out.clear();
    if (batch == n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
        return;
    }
    // Floyd: for j = N-B .. N-1 draw t in [0, j]; take t unless already taken, else j.
    if (batch <= 32) {
        for (std::size_t j = n - batch; j < n; ++j) {
            const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
            const bool taken = std::find(out.begin(), out.end(), t) != out.end();
            out.push_back(taken ? j : t);
        }
        return;
    }
    std::vector<bool> taken(n, false);
    for (std::size_t j = n - batch; j < n; ++j) {
        const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
        const std::size_t pick = taken[t] ? j : t;
        taken[pick] = true;
        out.push_back(pick);
    }
}

std::vector<std::size_t> sample_minibatch(std::size_t n, std::size_t batch, RngStream& rng) {
    std::vector<std::size_t> out;
    sample_minibatch(n, batch, rng, out);
    return out;
}

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Vec sgd_step(std::span<const double> theta, const LossModel& model, std::span<const std::size_t> batch, double lr) {
    Vec g(model.dim());
    model.batch_grad(theta, batch, g);
    if (!all_finite(g)) throw DivergedError("sgd_step: non-finite mini-batch gradient");
    Vec next(theta.begin(), theta.end());
    simd::axpy(-lr, g, next);
    return next;
}

Vec sgd_noise_sample(std::span<const double> theta, const LossModel& model, std::span<const std::size_t> batch) {
    Vec batch_g(model.dim());
    Vec full_g(model.dim());
    // Full gradient through the same per-sample path, so B == N gives xi == 0 exactly.
    std::vector<std::size_t> all(model.sample_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    model.batch_grad(theta, batch, batch_g);
    model.batch_grad(theta, all, full_g);
    Vec xi(model.dim());
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = full_g[i] - batch_g[i];
    return xi;
}

double noise_strength(std::span<const double> theta, const LossModel& model) {
    const std::size_t p = model.dim();
    const std::size_t n = model.sample_count();
    Vec mean(p, 0.0), g(p), delta(p);
    double m2 = 0.0;
    for (std::size_t mu = 0; mu < n; ++mu) {
        model.sample_grad(theta, mu, g);
        const double k = static_cast<double>(mu + 1);
        for (std::size_t i = 0; i < p; ++i) delta[i] = g[i] - mean[i];
        // Welford: M2 += |delta|^2 (k-1)/k, mean += delta / k.
        m2 += simd::sumsq(delta) * (k - 1.0) / k;
        simd::axpy(1.0 / k, delta, mean);
    }
    return m2 / static_cast<double>(n);
}

Trajectory run_sgd(const LossModel& model, std::span<const double> theta0, const SgdConfig& config, RngStream& rng) {
    config.validate(model.sample_count(), /*allow_zero_lr=*/true);
    if (theta0.size() != model.dim()) throw DimensionError("run_sgd: theta0 has wrong dimension");

    Trajectory traj;
    traj.time_variable = TimeVariable::t;
    traj.time_step = config.lr;
    traj.record_every = config.record_every;
    const bool keep_theta = config.record_snapshots && model.dim() <= Trajectory::kSnapshotLimit;

    Vec theta(theta0.begin(), theta0.end());
    Vec g(model.dim());
    Vec scratch;
    std::vector<std::size_t> batch;

    auto record = [&](std::uint64_t k) {
        const double loss = model.loss(theta);
        traj.steps.push_back(k);
        traj.times.push_back(config.lr * static_cast<double>(k));
        traj.losses.push_back(loss);
        if (config.record_noise) traj.noise_strengths.push_back(noise_strength(theta, model));
        if (keep_theta) traj.snapshots.push_back(theta);
        if (!std::isfinite(loss) || std::abs(loss) > kDivergenceLoss) {
            traj.diverged = true;
            traj.failure = "loss " + format_double(loss) + " at step " + std::to_string(k);
        }
    };

    record(0);
    for (std::uint64_t k = 1; k <= config.steps && !traj.diverged; ++k) {
        sample_minibatch(model.sample_count(), config.batch, rng, batch);
        model.batch_grad(theta, batch, g, scratch);
        if (!all_finite(g)) {
            traj.diverged = true;
            traj.failure = "non-finite gradient at step " + std::to_string(k);
            break;
        }
        simd::axpy(-config.lr, g, theta);
        if (k % config.record_every == 0 || k == config.steps) record(k);
    }
    traj.final_theta = std::move(theta);
    return traj;
}

}  // namespace sgdlab
