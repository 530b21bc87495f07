#pragma once

#include <cstdint>
#include <vector>

#include "sgdlab/models/loss_model.hpp"
#include "sgdlab/numerics/rng.hpp"
#include "sgdlab/trajectory.hpp"

namespace sgdlab {

struct SgdConfig {
    double lr = 0.1;
    std::size_t batch = 1;
    std::uint64_t steps = 1;
    std::uint64_t record_every = 1;
    bool record_noise = false;
    bool record_snapshots = true;

    /// Throws InputError unless lr > 0, 1 <= batch <= n_samples, steps >= 1, record_every >= 1.
    /// lr == 0 is accepted when allow_zero_lr is set (null dynamics).
    void validate(std::size_t n_samples, bool allow_zero_lr = false) const;
};

/// |L| above this (or non-finite) aborts a run as diverged.
inline constexpr double kDivergenceLoss = 1e12;

/// B distinct indices drawn uniformly without replacement from [0, N)
/// (Floyd's algorithm). B == N returns 0..N-1 without consuming draws.
std::vector<std::size_t> sample_minibatch(std::size_t n, std::size_t batch, RngStream& rng);
void sample_minibatch(std::size_t n, std::size_t batch, RngStream& rng, std::vector<std::size_t>& out);

/// theta - lr * (1/B) sum_{mu in batch} grad l_mu(theta). Throws DivergedError
/// on a non-finite gradient.
Vec sgd_step(std::span<const double> theta, const LossModel& model, std::span<const std::size_t> batch, double lr);

/// xi = -(grad L_batch(theta) - grad L(theta)).
Vec sgd_noise_sample(std::span<const double> theta, const LossModel& model, std::span<const std::size_t> batch);

/// N(theta) = (1/N) sum |grad l_mu|^2 - |grad L|^2, accumulated as the
/// population variance of the per-sample gradients, so it is never negative.
double noise_strength(std::span<const double> theta, const LossModel& model);

/// Runs config.steps SGD iterations from theta0 with a fresh mini-batch per
/// step. Records k, t = lr k, L (and N when requested) at k = 0 and every
/// record_every steps. Divergence stops the run and sets traj.diverged.
Trajectory run_sgd(const LossModel& model, std::span<const double> theta0, const SgdConfig& config, RngStream& rng);

}  // namespace sgdlab
