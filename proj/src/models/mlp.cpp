#include "sgdlab/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgdlab/errors.hpp"
#include "sgdlab/numerics/kernels.hpp"

namespace sgdlab {

Activation parse_activation(std::string_view name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw InputError("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "?";
}

Mlp::Mlp(std::vector<std::size_t> widths, Activation activation, std::shared_ptr<const Dataset> data, bool bias)
    : widths_(std::move(widths)), activation_(activation), data_(std::move(data)), bias_(bias) {
    if (!data_) throw InputError("mlp_model: null dataset");
    if (widths_.size() < 2) throw DimensionError("mlp_model: need at least input and output widths");
    if (std::any_of(widths_.begin(), widths_.end(), [](std::size_t w) { return w == 0; })) {
        throw DimensionError("mlp_model: widths must be >= 1");
    }
    if (widths_.front() != data_->dim()) {
        throw DimensionError("mlp_model: first width " + std::to_string(widths_.front()) +
                             " != data dimension " + std::to_string(data_->dim()));
    }
    if (widths_.back() != 1) throw DimensionError("mlp_model: last width must be 1 (scalar output)");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        Layer layer{widths_[l], widths_[l + 1], offset, 0};
        offset += layer.in * layer.out;
        layer.bias_offset = offset;
        if (bias_) offset += layer.out;
        layers_.push_back(layer);
    }
    param_count_ = offset;
}

namespace {

double activate(Activation a, double z) {
    switch (a) {
        case Activation::identity: return z;
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::tanh: return std::tanh(z);
    }
    return z;
}

// Derivative expressed through the pre-activation z and post-activation h.
double activate_deriv(Activation a, double z, double h) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: return 1.0 - h * h;
    }
    return 1.0;
}

}  // namespace

double Mlp::forward(std::span<const double> theta, std::span<const double> x, std::vector<Vec>& pre,
                    std::vector<Vec>& post) const {
    if (theta.size() != param_count_) throw DimensionError("mlp: theta has wrong dimension");
    const auto& k = simd::active();
    pre.resize(layers_.size());
    post.resize(layers_.size() + 1);
    post[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        pre[l].resize(layer.out);
        k.gemv(theta.data() + layer.weight_offset, post[l].data(), pre[l].data(), layer.out, layer.in);
        if (bias_) {
            for (std::size_t o = 0; o < layer.out; ++o) pre[l][o] += theta[layer.bias_offset + o];
        }
        post[l + 1].resize(layer.out);
        const bool hidden = l + 1 < layers_.size();
        for (std::size_t o = 0; o < layer.out; ++o) {
            post[l + 1][o] = hidden ? activate(activation_, pre[l][o]) : pre[l][o];
        }
    }
    return post.back()[0];
}

void Mlp::backward(std::span<const double> theta, const std::vector<Vec>& pre, const std::vector<Vec>& post,
                   double seed, std::span<double> out) const {
    if (out.size() != param_count_) throw DimensionError("mlp: gradient buffer has wrong dimension");
    const auto& k = simd::active();
    Vec delta{seed};
    Vec prev;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const Layer& layer = layers_[l];
        double* gw = out.data() + layer.weight_offset;
        for (std::size_t o = 0; o < layer.out; ++o) {
            double* row = gw + o * layer.in;
            const double d = delta[o];
            for (std::size_t i = 0; i < layer.in; ++i) row[i] = d * post[l][i];
        }
        if (bias_) std::copy(delta.begin(), delta.end(), out.begin() + static_cast<std::ptrdiff_t>(layer.bias_offset));
        if (l == 0) break;
        prev.assign(layer.in, 0.0);
        k.gemv_t_add(theta.data() + layer.weight_offset, delta.data(), prev.data(), layer.out, layer.in);
        for (std::size_t i = 0; i < layer.in; ++i) prev[i] *= activate_deriv(activation_, pre[l - 1][i], post[l][i]);
        delta.swap(prev);
    }
}

double Mlp::predict(std::span<const double> theta, std::span<const double> x) const {
    std::vector<Vec> pre, post;
    return forward(theta, x, pre, post);
}

double Mlp::sample_loss(std::span<const double> theta, std::size_t mu) const {
    const double r = predict(theta, data_->input(mu)) - data_->label(mu);
    return 0.5 * r * r;
}

void Mlp::sample_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const {
    std::vector<Vec> pre, post;
    const double r = forward(theta, data_->input(mu), pre, post) - data_->label(mu);
    backward(theta, pre, post, r, out);
}

double Mlp::output_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const {
    std::vector<Vec> pre, post;
    const double r = forward(theta, data_->input(mu), pre, post) - data_->label(mu);
    backward(theta, pre, post, 1.0, out);
    return r;
}

Vec Mlp::glorot_init(RngStream& rng) const {
    Vec theta(param_count_, 0.0);
    for (const Layer& layer : layers_) {
        const double sd = std::sqrt(2.0 / static_cast<double>(layer.in + layer.out));
        for (std::size_t i = 0; i < layer.in * layer.out; ++i) theta[layer.weight_offset + i] = sd * rng.normal();
    }
    return theta;
}

MlpInstance mlp_model(std::vector<std::size_t> widths, Activation activation, std::shared_ptr<const Dataset> data,
                      RngStream& init_rng, bool bias) {
    auto model = std::make_shared<Mlp>(std::move(widths), activation, std::move(data), bias);
    Vec theta0 = model->glorot_init(init_rng);
    return {std::move(model), std::move(theta0)};
}

}  // namespace sgdlab
