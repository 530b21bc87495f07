#pragma once

#include <cstdint>
#include <functional>
#include <variant>

#include "sgdlab/models/loss_model.hpp"
#include "sgdlab/numerics/rng.hpp"
#include "sgdlab/trajectory.hpp"

namespace sgdlab {

using DriftFn = std::function<void(std::span<const double> theta, std::span<double> out)>;
/// out = S(theta) z for a standard normal vector z.
using DiffusionFn = std::function<void(std::span<const double> theta, std::span<const double> z, std::span<double> out)>;
using LossFn = std::function<double(std::span<const double> theta)>;

struct NoNoise {};
/// Diffusion factor sqrt(2 D) I.
struct IsotropicNoise {
    double D;
};
/// Diffusion factor psd_sqrt(cov(theta)), recomputed every step.
struct MatrixNoise {
    std::function<SymMatrix(std::span<const double>)> cov;
};
/// Constant diffusion factor.
struct FixedFactorNoise {
    SymMatrix factor;
};
using NoiseModel = std::variant<NoNoise, IsotropicNoise, MatrixNoise, FixedFactorNoise>;

DiffusionFn make_diffusion(const NoiseModel& noise);

struct SdeConfig {
    double dt = 1e-3;
    std::uint64_t steps = 1;
    Vec theta0;
    std::uint64_t record_every = 1;
    bool record_snapshots = true;

    void validate() const;
};

/// A drift/diffusion pair plus the loss used for recording, and which clock
/// the step variable measures.
struct SdeProcess {
    std::size_t dim = 0;
    DriftFn drift;
    DiffusionFn diffusion;  // empty: deterministic flow
    LossFn loss;
    TimeVariable time_variable = TimeVariable::t;
};

/// One Ito step theta += drift(theta) dt + S(theta) sqrt(dt) z with all
/// coefficients taken at the left endpoint.
class EulerMaruyama {
public:
    EulerMaruyama(SdeProcess process, double dt);

    void step(std::span<double> theta, RngStream& rng);
    const SdeProcess& process() const { return process_; }
    double dt() const { return dt_; }

private:
    SdeProcess process_;
    double dt_;
    double sqrt_dt_;
    Vec drift_, z_, noise_;
};

/// Integrates process for config.steps steps, recording at step 0 and every
/// record_every steps. A non-finite state stops the run with traj.diverged.
Trajectory simulate(const SdeProcess& process, const SdeConfig& config, RngStream& rng);

Trajectory euler_maruyama(const DriftFn& drift, const DiffusionFn& diffusion, const SdeConfig& config,
                          RngStream& rng, const LossFn& loss = {});

/// d theta = -grad L dt + sqrt(2 D) dW.
SdeProcess gld_process(const Objective& model, double D);
Trajectory gld(const Objective& model, double D, const SdeConfig& config, RngStream& rng);

/// d theta = -grad L dt + sqrt(2 eta L(theta) / B) psd_sqrt(H*) dW. Throws
/// PositivityError when L(theta) < 0.
SdeProcess sgd_sde_process(const Objective& model, double lr, double batch, const SymMatrix& hessian_ref);
Trajectory sgd_sde(const Objective& model, double lr, double batch, const SymMatrix& hessian_ref,
                   const SdeConfig& config, RngStream& rng);

/// Loss values at or below this abort log-landscape integration.
inline constexpr double kLossFloor = 1e-300;

/// d theta = -grad log L dtau + sqrt(2 eta h* / B) dW_tau. with_noise = false
/// gives the gradient flow on log L.
SdeProcess log_landscape_process(const Objective& model, double lr, double batch, double h_star,
                                 bool with_noise = true);
/// Anisotropic variant: diffusion factor sqrt(2 eta / B) psd_sqrt(H*).
SdeProcess log_landscape_process(const Objective& model, double lr, double batch, const SymMatrix& hessian_ref);

Trajectory log_landscape_langevin(const Objective& model, double lr, double batch, double h_star,
                                  const SdeConfig& config, RngStream& rng, bool with_noise = true);
Trajectory log_landscape_langevin(const Objective& model, double lr, double batch, const SymMatrix& hessian_ref,
                                  const SdeConfig& config, RngStream& rng);

struct TimeChange {
    Vec t;
    Vec tau;
};

/// tau(t) = int_0^t L dt' by the left-endpoint rule tau_{j+1} = tau_j + L_j dt.
/// Needs a t-clock trajectory recorded at every step.
TimeChange tau_of_t(const Trajectory& traj);

/// tau ~= L(theta*) t for a path that stays near the minimum.
inline double approximate_tau(double t, double min_loss) { return min_loss * t; }

/// Coordinate `coord` of the recorded snapshots after dropping the first
/// burn_in_fraction of them. Thinning is the trajectory's record_every.
Vec stationary_samples(const Trajectory& traj, std::size_t coord = 0, double burn_in_fraction = 0.2);

}  // namespace sgdlab
