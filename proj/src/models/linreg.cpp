#include "sgdlab/models/linreg.hpp"

#include <algorithm>

#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/kernels.hpp"

namespace sgdlab {

namespace {

void check_dim(std::span<const double> theta, std::size_t d) {
    if (theta.size() != d) {
        throw DimensionError("linreg: theta has dimension " + std::to_string(theta.size()) + ", expected " +
                             std::to_string(d));
    }
}

}  // namespace

LinearRegression::LinearRegression(std::shared_ptr<const Dataset> data) : data_(std::move(data)) {
    if (!data_) throw InputError("linreg_model: null dataset");
    const std::size_t d = data_->dim();
    const std::size_t n = data_->size();

    gram_ = SymMatrix(d);
    Vec xty(d, 0.0);
    for (std::size_t mu = 0; mu < n; ++mu) {
        gram_.rank1_update_upper(1.0, data_->input(mu));
        simd::axpy(data_->label(mu), data_->input(mu), xty);
    }
    gram_.mirror_upper();
    gram_ *= 1.0 / static_cast<double>(n);
    for (double& v : xty) v /= static_cast<double>(n);

    reference_ = psd_pinv(gram_).multiply(xty);
    reference_loss_ = loss_by_samples(reference_);
    reference_grad_.assign(d, 0.0);
    LossModel::grad(reference_, reference_grad_);
}

double LinearRegression::sample_loss(std::span<const double> theta, std::size_t mu) const {
    check_dim(theta, dim());
    const double r = simd::dot(theta, data_->input(mu)) - data_->label(mu);
    return 0.5 * r * r;
}

void LinearRegression::sample_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const {
    const double r = output_grad(theta, mu, out);
    for (double& v : out) v *= r;
}

double LinearRegression::output_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const {
    check_dim(theta, dim());
    const auto x = data_->input(mu);
    std::copy(x.begin(), x.end(), out.begin());
    return simd::dot(theta, x) - data_->label(mu);
}

double LinearRegression::loss(std::span<const double> theta) const {
    check_dim(theta, dim());
    // L* + g*.delta + delta^T S delta / 2 without temporaries; this sits in
    // the inner loop of first-passage runs.
    const std::size_t d = dim();
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double di = theta[i] - reference_[i];
        lin += reference_grad_[i] * di;
        const auto row = gram_.row(i);
        double s = 0.5 * row[i] * di;
        for (std::size_t j = i + 1; j < d; ++j) s += row[j] * (theta[j] - reference_[j]);
        quad += di * s;
    }
    return std::max(0.0, reference_loss_ + lin + quad);
}

void LinearRegression::grad(std::span<const double> theta, std::span<double> out) const {
    check_dim(theta, dim());
    const std::size_t d = dim();
    for (std::size_t i = 0; i < d; ++i) {
        const auto row = gram_.row(i);
        double s = reference_grad_[i];
        for (std::size_t j = 0; j < d; ++j) s += row[j] * (theta[j] - reference_[j]);
        out[i] = s;
    }
}

std::optional<SymMatrix> LinearRegression::hessian(std::span<const double> theta) const {
    check_dim(theta, dim());
    return gram_;
}

std::shared_ptr<LinearRegression> linreg_model(std::shared_ptr<const Dataset> data) {
    return std::make_shared<LinearRegression>(std::move(data));
}

}  // namespace sgdlab
