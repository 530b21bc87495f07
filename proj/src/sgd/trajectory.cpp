#include "sgdlab/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "sgdlab/errors.hpp"

namespace sgdlab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "k," << (traj.time_variable == TimeVariable::t ? "t" : "tau") << ",loss,noise_strength\n";
    const bool has_noise = traj.noise_strengths.size() == traj.size();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << traj.steps[i] << ',' << format_double(traj.times[i]) << ',' << format_double(traj.losses[i]) << ',';
        if (has_noise) out << format_double(traj.noise_strengths[i]);
        out << '\n';
    }
}

void write_snapshots_csv(const Trajectory& traj, std::ostream& out) {
    if (traj.snapshots.empty() || traj.snapshots.size() != traj.size()) {
        throw InputError("write_snapshots_csv: trajectory has no parameter snapshots");
    }
    out << 'k';
    for (std::size_t j = 0; j < traj.snapshots.front().size(); ++j) out << ",theta_" << j;
    out << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << traj.steps[i];
        for (double v : traj.snapshots[i]) out << ',' << format_double(v);
        out << '\n';
    }
}

}  // namespace sgdlab
