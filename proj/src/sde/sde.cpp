#include "sgdlab/sde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgdlab/errors.hpp"

namespace sgdlab {

namespace {

void multiply_into(const SymMatrix& m, std::span<const double> z, std::span<double> out) {
    for (std::size_t i = 0; i < m.dim(); ++i) {
        const auto r = m.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * z[j];
        out[i] = s;
    }
}

}  // namespace

DiffusionFn make_diffusion(const NoiseModel& noise) {
    struct Visitor {
        DiffusionFn operator()(const NoNoise&) const { return {}; }
        DiffusionFn operator()(const IsotropicNoise& n) const {
            if (!(n.D >= 0.0)) throw InputError("isotropic noise: D must be >= 0");
            const double scale = std::sqrt(2.0 * n.D);
            return [scale](std::span<const double>, std::span<const double> z, std::span<double> out) {
                for (std::size_t i = 0; i < z.size(); ++i) out[i] = scale * z[i];
            };
        }
        DiffusionFn operator()(const MatrixNoise& n) const {
            return [cov = n.cov](std::span<const double> theta, std::span<const double> z, std::span<double> out) {
                multiply_into(psd_sqrt(cov(theta)), z, out);
            };
        }
        DiffusionFn operator()(const FixedFactorNoise& n) const {
            return [factor = n.factor](std::span<const double>, std::span<const double> z, std::span<double> out) {
                multiply_into(factor, z, out);
            };
        }
    };
    return std::visit(Visitor{}, noise);
}

void SdeConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("sde: dt must be positive");
    if (steps < 1) throw InputError("sde: steps must be >= 1");
    if (record_every < 1) throw InputError("sde: record_every must be >= 1");
    if (theta0.empty()) throw InputError("sde: theta0 is empty");
    for (double v : theta0) {
        if (!std::isfinite(v)) throw InputError("sde: theta0 must be finite");
    }
}

EulerMaruyama::EulerMaruyama(SdeProcess process, double dt)
    : process_(std::move(process)),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      drift_(process_.dim),
      z_(process_.dim),
      noise_(process_.dim) {
    if (!process_.drift) throw InputError("sde: process has no drift");
}

void EulerMaruyama::step(std::span<double> theta, RngStream& rng) {
    process_.drift(theta, drift_);
    if (process_.diffusion) {
        rng.fill_normal(z_);
        process_.diffusion(theta, z_, noise_);
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += drift_[i] * dt_ + noise_[i] * sqrt_dt_;
    } else {
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += drift_[i] * dt_;
    }
}

Trajectory simulate(const SdeProcess& process, const SdeConfig& config, RngStream& rng) {
    config.validate();
    if (config.theta0.size() != process.dim) throw DimensionError("sde: theta0 has wrong dimension");
    EulerMaruyama stepper(process, config.dt);

    Trajectory traj;
    traj.time_variable = process.time_variable;
    traj.time_step = config.dt;
    traj.record_every = config.record_every;
    const bool keep_theta = config.record_snapshots && process.dim <= Trajectory::kSnapshotLimit;
    Vec theta = config.theta0;

    auto record = [&](std::uint64_t k) {
        traj.steps.push_back(k);
        traj.times.push_back(config.dt * static_cast<double>(k));
        traj.losses.push_back(process.loss ? process.loss(theta) : std::nan(""));
        if (keep_theta) traj.snapshots.push_back(theta);
    };

    record(0);
    for (std::uint64_t k = 1; k <= config.steps; ++k) {
        stepper.step(theta, rng);
        if (!std::all_of(theta.begin(), theta.end(), [](double v) { return std::isfinite(v); })) {
            traj.diverged = true;
            traj.failure = "non-finite state at step " + std::to_string(k);
            break;
        }
        if (k % config.record_every == 0 || k == config.steps) record(k);
    }
    traj.final_theta = std::move(theta);
    return traj;
}

Trajectory euler_maruyama(const DriftFn& drift, const DiffusionFn& diffusion, const SdeConfig& config,
                          RngStream& rng, const LossFn& loss) {
    SdeProcess p;
    p.dim = config.theta0.size();
    p.drift = drift;
    p.diffusion = diffusion;
    p.loss = loss;
    return simulate(p, config, rng);
}

namespace {

DriftFn negative_gradient(const Objective& model) {
    return [&model](std::span<const double> theta, std::span<double> out) {
        model.grad(theta, out);
        for (double& v : out) v = -v;
    };
}

LossFn loss_of(const Objective& model) {
    return [&model](std::span<const double> theta) { return model.loss(theta); };
}

}  // namespace

SdeProcess gld_process(const Objective& model, double D) {
    SdeProcess p;
    p.dim = model.dim();
    p.drift = negative_gradient(model);
    p.diffusion = make_diffusion(IsotropicNoise{D});
    p.loss = loss_of(model);
    return p;
}

Trajectory gld(const Objective& model, double D, const SdeConfig& config, RngStream& rng) {
    return simulate(gld_process(model, D), config, rng);
}

SdeProcess sgd_sde_process(const Objective& model, double lr, double batch, const SymMatrix& hessian_ref) {
    if (!(lr >= 0.0) || !(batch > 0.0)) throw InputError("sgd_sde: need lr >= 0 and B > 0");
    if (hessian_ref.dim() != model.dim()) throw DimensionError("sgd_sde: reference Hessian has wrong dimension");
    SdeProcess p;
    p.dim = model.dim();
    p.drift = negative_gradient(model);
    p.loss = loss_of(model);
    const SymMatrix root = psd_sqrt(hessian_ref);
    const double scale = 2.0 * lr / batch;
    p.diffusion = [&model, root, scale](std::span<const double> theta, std::span<const double> z,
                                        std::span<double> out) {
        const double loss = model.loss(theta);
        if (loss < 0.0) throw PositivityError("sgd_sde: negative loss " + format_double(loss));
        const double amp = std::sqrt(scale * loss);
        multiply_into(root, z, out);
        for (double& v : out) v *= amp;
    };
    return p;
}

Trajectory sgd_sde(const Objective& model, double lr, double batch, const SymMatrix& hessian_ref,
                   const SdeConfig& config, RngStream& rng) {
    return simulate(sgd_sde_process(model, lr, batch, hessian_ref), config, rng);
}

namespace {

DriftFn log_gradient(const Objective& model) {
    return [&model](std::span<const double> theta, std::span<double> out) {
        const double loss = model.loss(theta);
        if (!(loss > kLossFloor)) {
            throw PositivityError("log-landscape Langevin: loss " + format_double(loss) + " at or below floor");
        }
        model.grad(theta, out);
        const double inv = -1.0 / loss;
        for (double& v : out) v *= inv;
    };
}

}  // namespace

SdeProcess log_landscape_process(const Objective& model, double lr, double batch, double h_star, bool with_noise) {
    if (!(h_star > 0.0)) throw InputError("log_landscape_langevin: h* must be positive");
    if (!(lr >= 0.0) || !(batch > 0.0)) throw InputError("log_landscape_langevin: need lr >= 0 and B > 0");
    SdeProcess p;
    p.dim = model.dim();
    p.drift = log_gradient(model);
    p.loss = loss_of(model);
    p.time_variable = TimeVariable::tau;
    // Temperature T = eta h* / B, factor sqrt(2 T).
    if (with_noise) p.diffusion = make_diffusion(IsotropicNoise{lr * h_star / batch});
    return p;
}

SdeProcess log_landscape_process(const Objective& model, double lr, double batch, const SymMatrix& hessian_ref) {
    if (hessian_ref.dim() != model.dim()) {
        throw DimensionError("log_landscape_langevin: reference Hessian has wrong dimension");
    }
    if (!(lr >= 0.0) || !(batch > 0.0)) throw InputError("log_landscape_langevin: need lr >= 0 and B > 0");
    SdeProcess p;
    p.dim = model.dim();
    p.drift = log_gradient(model);
    p.loss = loss_of(model);
    p.time_variable = TimeVariable::tau;
    SymMatrix factor = psd_sqrt(hessian_ref);
    factor *= std::sqrt(2.0 * lr / batch);
    p.diffusion = make_diffusion(FixedFactorNoise{std::move(factor)});
    return p;
}

Trajectory log_landscape_langevin(const Objective& model, double lr, double batch, double h_star,
                                  const SdeConfig& config, RngStream& rng, bool with_noise) {
    return simulate(log_landscape_process(model, lr, batch, h_star, with_noise), config, rng);
}

Trajectory log_landscape_langevin(const Objective& model, double lr, double batch, const SymMatrix& hessian_ref,
                                  const SdeConfig& config, RngStream& rng) {
    return simulate(log_landscape_process(model, lr, batch, hessian_ref), config, rng);
}

TimeChange tau_of_t(const Trajectory& traj) {
    if (traj.time_variable != TimeVariable::t) throw InputError("tau_of_t: trajectory is not on the t clock");
    if (traj.record_every != 1 || traj.losses.size() != traj.size() || traj.size() == 0) {
        throw InputError("tau_of_t: losses must be recorded at every step");
    }
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.steps[i] != i) throw InputError("tau_of_t: losses must be recorded at every step");
        if (std::isnan(traj.losses[i])) throw InputError("tau_of_t: missing loss at step " + std::to_string(i));
    }
    TimeChange tc;
    tc.t = traj.times;
    tc.tau.resize(traj.size());
    tc.tau[0] = 0.0;
    for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
        tc.tau[j + 1] = tc.tau[j] + traj.losses[j] * (traj.times[j + 1] - traj.times[j]);
    }
    return tc;
}

Vec stationary_samples(const Trajectory& traj, std::size_t coord, double burn_in_fraction) {
    if (traj.snapshots.empty()) throw InputError("stationary_samples: trajectory has no snapshots");
    if (burn_in_fraction < 0.0 || burn_in_fraction >= 1.0) throw InputError("stationary_samples: bad burn-in fraction");
    const auto skip = static_cast<std::size_t>(std::ceil(burn_in_fraction * static_cast<double>(traj.snapshots.size())));
    Vec out;
    out.reserve(traj.snapshots.size() - skip);
    for (std::size_t i = skip; i < traj.snapshots.size(); ++i) out.push_back(traj.snapshots[i].at(coord));
    return out;
}

}  // namespace sgdlab
