#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sgdlab/models/loss_model.hpp"
#include "sgdlab/numerics/rng.hpp"
#include "sgdlab/numerics/stats.hpp"
#include "sgdlab/sde/sde.hpp"

namespace sgdlab {

struct EscapeGeometry {
    double L_min = 0.0;
    double L_saddle = 0.0;
    double h_star = 0.0;
    double h_e_saddle = 0.0;  // negative
    std::size_t n = 1;
    double det_ratio = 1.0;  // det H(min) / |det H(saddle)|

    void validate() const;
    double ratio() const { return L_saddle / L_min; }
};

/// phi = 1 + B / (eta h*).
double theory_phi(double batch, double lr, double h_star);

/// (1/2pi) sqrt(h* |h_s|) c^-(1/2 + B/(eta h*)).
double kramers_rate_1d(const EscapeGeometry& geom, double batch, double lr);

struct LangerRate {
    double kappa = 0.0;
    double exponent = 0.0;  // B/(eta h*) + 1 - n/2
    bool unstable = false;  // n >= 2 (B/(eta h*) + 1)
};

/// (|h_e_s| / 2pi) sqrt(det_ratio) c^-(B/(eta h*) + 1 - n/2).
LangerRate langer_rate_multi(const EscapeGeometry& geom, double batch, double lr);

/// 2 (B/(eta h*) + 1).
double stability_max_dim(double batch, double lr, double h_star);

struct PowerLawFitOptions {
    std::size_t bins = 64;
    double central_mass = 0.99;
    std::uint64_t min_count = 5;
    std::size_t min_samples = 10000;
    double z = 1.96;  // two-sided 95% interval
};

struct PowerLawFit {
    double phi_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
    std::size_t bins_used = 0;
    Histogram hist;
    Vec bin_loss;     // L at each used bin center
    Vec bin_density;  // count / width at each used bin
};

/// Histograms the samples over their central quantile range and regresses
/// log(count / width) on log L(center), weighting each bin by its count.
/// phi_hat = -slope.
PowerLawFit fit_power_law(std::span<const double> samples, const std::function<double(double)>& loss_at,
                          const PowerLawFitOptions& options = {});
/// Same with L from a one-dimensional objective.
PowerLawFit fit_power_law(std::span<const double> samples, const Objective& model,
                          const PowerLawFitOptions& options = {});

struct FptRun {
    double t_p = 0.0;
    bool censored = false;
};

struct FptResult {
    double c = 0.0;
    double time_cap = 0.0;
    std::vector<FptRun> runs;
    std::size_t censored_count = 0;
    double mean = 0.0;
    double se = 0.0;
    double median = 0.0;

    Vec passage_times() const;
};

struct FptSgdConfig {
    double lr = 0.1;
    std::size_t batch = 1;
    std::uint64_t max_steps = 1000000;
    std::size_t runs = 100;
    /// When false, a threshold no run reached comes back with NaN statistics
    /// instead of throwing (callers that persist partial results).
    bool throw_if_unobserved = true;
};

/// For each run (substream r of rng) runs SGD from theta_start and records,
/// for every ratio c, the first t = eta k with L(theta_k) >= c L(theta*).
/// One path serves all thresholds, so t_p is monotone in c within a run.
/// Throws EscapeNotObservedError when some c is never reached.
std::vector<FptResult> first_passage_times(const LossModel& model, std::span<const double> theta_start,
                                           double min_loss, std::span<const double> ratios,
                                           const FptSgdConfig& config, const RngStream& rng);

using EscapePredicate = std::function<bool(std::span<const double>)>;

struct FptSdeConfig {
    double dt = 1e-3;
    std::uint64_t max_steps = 1000000;
    std::size_t runs = 100;
    /// Passage times are k dt time_scale, e.g. 1 / L(theta*) to report
    /// tau-process times on the t clock (tau ~= L(theta*) t).
    double time_scale = 1.0;
};

/// First step at which escaped(theta) holds, per run (substream r of rng).
FptResult first_passage_sde(const SdeProcess& process, std::span<const double> theta_start,
                            const EscapePredicate& escaped, const FptSdeConfig& config, const RngStream& rng);

/// escaped(theta) = L(theta) >= level.
EscapePredicate level_set_criterion(const Objective& model, double level);

struct EscapeRate {
    double kappa = 0.0;
    double se = 0.0;
    std::size_t passages = 0;
};

/// kappa = 1 / mean(t_p) over uncensored runs, delta-method SE. Needs at
/// least 30 passages. Assumes exponentially distributed escape times.
EscapeRate empirical_escape_rate(const FptResult& fpt);

/// Columns run_id,c,t_p,censored; t_p is empty for censored runs.
void write_fpt_csv(std::span<const FptResult> results, std::ostream& out);

}  // namespace sgdlab
