#pragma once

#include <memory>

#include "sgdlab/models/dataset.hpp"
#include "sgdlab/models/loss_model.hpp"

namespace sgdlab {

/// f(theta, x) = theta . x with mean-square loss l_mu = (theta . x_mu - y_mu)^2 / 2.
///
/// The loss is exactly quadratic, so loss() and grad() are evaluated from
/// second-order statistics in O(d^2): the exact loss and gradient at a
/// reference point (the pseudo-inverse least-squares solution) plus the
/// Hessian S = (1/N) sum x x^T. This keeps per-step loss checks cheap in
/// long SGD runs without losing accuracy near the minimum.
class LinearRegression final : public LossModel {
public:
    explicit LinearRegression(std::shared_ptr<const Dataset> data);

    std::size_t dim() const override { return data_->dim(); }
    std::size_t sample_count() const override { return data_->size(); }
    double sample_loss(std::span<const double> theta, std::size_t mu) const override;
    void sample_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const override;
    bool has_output_grad() const override { return true; }
    double output_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const override;

    double loss(std::span<const double> theta) const override;
    void grad(std::span<const double> theta, std::span<double> out) const override;
    using Objective::grad;
    std::optional<SymMatrix> hessian(std::span<const double> theta) const override;

    const Dataset& data() const { return *data_; }
    /// (1/N) sum x x^T.
    const SymMatrix& gram() const { return gram_; }
    /// Least-squares minimizer from the normal equations (pseudo-inverse).
    std::span<const double> minimizer() const { return reference_; }
    double min_loss() const { return reference_loss_; }

private:
    std::shared_ptr<const Dataset> data_;
    SymMatrix gram_;
    Vec reference_;
    double reference_loss_ = 0.0;
    Vec reference_grad_;
};

std::shared_ptr<LinearRegression> linreg_model(std::shared_ptr<const Dataset> data);

}  // namespace sgdlab
