#include "sgdlab/models/loss_model.hpp"

#include <algorithm>

#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/kernels.hpp"

namespace sgdlab {

Vec Objective::grad(std::span<const double> theta) const {
    Vec g(dim());
    grad(theta, g);
    return g;
}

double LossModel::output_grad(std::span<const double>, std::size_t, std::span<double>) const {
    throw UnsupportedError("model does not expose output gradients");
}

namespace {

// Pairwise accumulation of per-sample gradients over [lo, hi) into out.
void accumulate_grads(const LossModel& model, std::span<const double> theta, std::span<const std::size_t> idx,
                      std::span<double> out, Vec& scratch) {
    std::fill(out.begin(), out.end(), 0.0);
    constexpr std::size_t kBlock = 32;
    if (idx.size() <= kBlock) {
        scratch.resize(out.size());
        for (std::size_t mu : idx) {
            model.sample_grad(theta, mu, scratch);
            simd::axpy(1.0, scratch, out);
        }
        return;
    }
    const std::size_t half = idx.size() / 2;
    accumulate_grads(model, theta, idx.first(half), out, scratch);
    Vec right(out.size());
    accumulate_grads(model, theta, idx.subspan(half), right, scratch);
    simd::axpy(1.0, right, out);
}

}  // namespace

double LossModel::loss_by_samples(std::span<const double> theta) const {
    const std::size_t n = sample_count();
    Vec losses(n);
    for (std::size_t mu = 0; mu < n; ++mu) losses[mu] = sample_loss(theta, mu);
    return pairwise_sum(losses) / static_cast<double>(n);
}

double LossModel::loss(std::span<const double> theta) const { return loss_by_samples(theta); }

void LossModel::grad(std::span<const double> theta, std::span<double> out) const {
    std::vector<std::size_t> all(sample_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    batch_grad(theta, all, out);
}

void LossModel::batch_grad(std::span<const double> theta, std::span<const std::size_t> batch,
                           std::span<double> out) const {
    Vec scratch;
    batch_grad(theta, batch, out, scratch);
}

void LossModel::batch_grad(std::span<const double> theta, std::span<const std::size_t> batch, std::span<double> out,
                           Vec& scratch) const {
    if (batch.empty()) throw InputError("batch_grad: empty batch");
    if (out.size() != dim() || theta.size() != dim()) throw DimensionError("batch_grad: dimension mismatch");
    accumulate_grads(*this, theta, batch, out, scratch);
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (double& v : out) v *= inv;
}

}  // namespace sgdlab
