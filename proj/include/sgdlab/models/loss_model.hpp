#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "sgdlab/numerics/linalg.hpp"

namespace sgdlab {

/// Anything with a loss and gradient over a parameter vector.
class Objective {
public:
    virtual ~Objective() = default;

    virtual std::size_t dim() const = 0;
    virtual double loss(std::span<const double> theta) const = 0;
    virtual void grad(std::span<const double> theta, std::span<double> out) const = 0;
    /// Closed-form Hessian when the model has one.
    virtual std::optional<SymMatrix> hessian(std::span<const double> /*theta*/) const { return std::nullopt; }

    Vec grad(std::span<const double> theta) const;
};

/// Empirical risk L(theta) = (1/N) sum_mu l_mu(theta) over a finite sample.
/// loss() and grad() default to averages of the per-sample terms.
class LossModel : public Objective {
public:
    virtual std::size_t sample_count() const = 0;
    virtual double sample_loss(std::span<const double> theta, std::size_t mu) const = 0;
    virtual void sample_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const = 0;

    /// Mean-square models expose the output gradient grad f(theta, x_mu).
    virtual bool has_output_grad() const { return false; }
    /// Writes grad f(theta, x_mu) into out and returns the residual f - y.
    virtual double output_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const;

    double loss(std::span<const double> theta) const override;
    void grad(std::span<const double> theta, std::span<double> out) const override;
    using Objective::grad;

    /// (1/N) sum of per-sample losses, pairwise accumulated. Reference path
    /// for models that override loss() with a faster closed form.
    double loss_by_samples(std::span<const double> theta) const;

    /// Mean of per-sample gradients over the given indices.
    void batch_grad(std::span<const double> theta, std::span<const std::size_t> batch, std::span<double> out) const;
    /// Same, reusing caller-owned scratch space across calls.
    void batch_grad(std::span<const double> theta, std::span<const std::size_t> batch, std::span<double> out,
                    Vec& scratch) const;
};

}  // namespace sgdlab
