#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgdlab/numerics/linalg.hpp"

namespace sgdlab {

enum class TimeVariable { t, tau };

/// Recorded path of a discrete or continuous run. Entry i of steps, times,
/// losses (and noise_strengths / snapshots when present) describe the same
/// recorded step.
struct Trajectory {
    /// Parameter vectors are kept only up to this dimension.
    static constexpr std::size_t kSnapshotLimit = 10000;

    TimeVariable time_variable = TimeVariable::t;
    double time_step = 0.0;  // eta for SGD (t = eta k), dt or dtau for SDEs
    std::uint64_t record_every = 1;
    std::vector<std::uint64_t> steps;
    Vec times;
    Vec losses;
    Vec noise_strengths;
    std::vector<Vec> snapshots;
    /// Parameters after the last executed step, kept at any dimension.
    Vec final_theta;
    bool diverged = false;
    std::string failure;

    std::size_t size() const { return steps.size(); }
};

/// Columns k,t,loss,noise_strength (tau instead of t for tau-time runs);
/// noise_strength is left empty when it was not recorded.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Columns k,theta_0..theta_{P-1}; throws when no snapshots were stored.
void write_snapshots_csv(const Trajectory& traj, std::ostream& out);

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_double(double v);

}  // namespace sgdlab
