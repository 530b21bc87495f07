#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>

#include "sgdlab/models/loss_model.hpp"
#include "sgdlab/numerics/rng.hpp"

namespace sgdlab {

/// Largest parameter count for which P x P gradient matrices are formed.
inline constexpr std::size_t kMaxDenseParams = 4096;

/// (1/B) (N - B) / (N - 1); zero when B == N.
double covariance_prefactor(std::size_t n, std::size_t batch);

struct CovarianceReport {
    SymMatrix sigma_exact;
    std::optional<SymMatrix> sigma_empirical;
    std::size_t batch = 0;
    std::size_t samples = 0;
    double prefactor = 0.0;
};

/// Sigma = (1/B)(N-B)/(N-1) [(1/N) sum g g^T - grad L grad L^T], formed as
/// the population covariance of the per-sample gradients.
CovarianceReport sigma_exact(std::span<const double> theta, const LossModel& model, std::size_t batch);

/// Sample covariance (n_draws - 1 denominator) of xi over independent mini-batches.
SymMatrix sigma_empirical(std::span<const double> theta, const LossModel& model, std::size_t batch,
                          std::size_t n_draws, RngStream& rng);

/// Small-batch form (1/B)(1/N) sum g g^T: no finite-population factor and
/// no mean-gradient term.
SymMatrix sigma_small_batch(std::span<const double> theta, const LossModel& model, std::size_t batch);

/// (2 L / B) H, the valley approximation of Sigma.
SymMatrix sigma_loss_hessian(double loss, const SymMatrix& hessian, std::size_t batch);

/// (1/N) sum grad f grad f^T.
SymMatrix gauss_newton_hessian(std::span<const double> theta, const LossModel& model);

struct DecouplingReport {
    /// (1/N) sum r_mu^2 grad f grad f^T, i.e. (2/N) sum l_mu grad f grad f^T.
    SymMatrix exact_matrix;
    /// 2 L (1/N) sum grad f grad f^T.
    SymMatrix decoupled_matrix;
    Spectrum exact_spectrum;
    Spectrum decoupled_spectrum;
    /// Set when P > N: both matrices are the N x N sample-space Gram forms,
    /// which share every nonzero eigenvalue with the P x P forms.
    bool dual = false;
    double loss = 0.0;
    double overlap = 0.0;
};

/// Builds both sides of the decoupling relation and their decile overlap.
/// Throws UnsupportedError for models without output gradients.
DecouplingReport decoupling_check(std::span<const double> theta, const LossModel& model);

/// Sorts both spectra ascending, cuts each into ten equal-count groups and
/// returns max |mean_a - mean_b| / |mean_a| over groups 2..10.
double decile_overlap(std::span<const double> a, std::span<const double> b);

/// Central differences of grad with step 1e-4 (1 + |theta|_inf) when step
/// is 0, symmetrized. Refuses P > 200.
SymMatrix hessian_fd(std::span<const double> theta, const Objective& model, double step = 0.0);

struct EffectiveDimension {
    std::size_t n = 0;
    double eps_rel = 1e-2;
    double eps_abs = 1e-8;
    double threshold = 0.0;
    Vec kept;
};

/// n = #{lambda_i > max(eps_abs, eps_rel lambda_max)}. The spectrum must be
/// sorted descending.
EffectiveDimension effective_dimension(std::span<const double> eigenvalues, double eps_rel = 1e-2,
                                       double eps_abs = 1e-8);

/// Columns rank,eigenvalue with rank starting at 1.
void write_spectrum_csv(std::span<const double> eigenvalues, std::ostream& out);

}  // namespace sgdlab
