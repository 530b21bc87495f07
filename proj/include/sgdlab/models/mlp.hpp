#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "sgdlab/models/dataset.hpp"
#include "sgdlab/models/loss_model.hpp"

namespace sgdlab {

enum class Activation { identity, relu, tanh };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a);

/// Fully connected network with scalar output and mean-square loss.
/// widths = {d, h_1, ..., h_k, 1}; hidden layers use `activation`, the output
/// layer is linear. Parameters are laid out layer by layer as the row-major
/// weight matrix (out x in) followed by the bias vector when enabled.
/// Gradients come from an explicit backward pass; ReLU'(0) is taken as 0.
class Mlp final : public LossModel {
public:
    Mlp(std::vector<std::size_t> widths, Activation activation, std::shared_ptr<const Dataset> data,
        bool bias = true);

    std::size_t dim() const override { return param_count_; }
    std::size_t sample_count() const override { return data_->size(); }
    double sample_loss(std::span<const double> theta, std::size_t mu) const override;
    void sample_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const override;
    bool has_output_grad() const override { return true; }
    double output_grad(std::span<const double> theta, std::size_t mu, std::span<double> out) const override;

    double predict(std::span<const double> theta, std::span<const double> x) const;

    /// Weights ~ N(0, 2 / (fan_in + fan_out)), biases zero.
    Vec glorot_init(RngStream& rng) const;

    const std::vector<std::size_t>& widths() const { return widths_; }
    Activation activation() const { return activation_; }
    const Dataset& data() const { return *data_; }

private:
    struct Layer {
        std::size_t in, out, weight_offset, bias_offset;
    };
    // Forward pass keeping pre-activations; returns the output.
    double forward(std::span<const double> theta, std::span<const double> x, std::vector<Vec>& pre,
                   std::vector<Vec>& post) const;
    // Backward pass with output seed; writes the full parameter gradient.
    void backward(std::span<const double> theta, const std::vector<Vec>& pre, const std::vector<Vec>& post,
                  double seed, std::span<double> out) const;

    std::vector<std::size_t> widths_;
    Activation activation_;
    std::shared_ptr<const Dataset> data_;
    bool bias_;
    std::vector<Layer> layers_;
    std::size_t param_count_ = 0;
};

struct MlpInstance {
    std::shared_ptr<Mlp> model;
    Vec theta0;
};

/// Builds the network and draws its Glorot initialization from init_rng.
MlpInstance mlp_model(std::vector<std::size_t> widths, Activation activation, std::shared_ptr<const Dataset> data,
                      RngStream& init_rng, bool bias = true);

}  // namespace sgdlab
