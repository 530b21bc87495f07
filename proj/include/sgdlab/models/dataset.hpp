#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>

#include "sgdlab/numerics/linalg.hpp"
#include "sgdlab/numerics/rng.hpp"

namespace sgdlab {

/// Immutable set of (x, y) samples, x in R^d, y scalar. Inputs are stored
/// row-major, one row per sample.
class Dataset {
public:
    Dataset(std::size_t dim, Vec inputs, Vec labels);

    std::size_t size() const { return labels_.size(); }
    std::size_t dim() const { return dim_; }
    std::span<const double> input(std::size_t mu) const { return {inputs_.data() + mu * dim_, dim_}; }
    double label(std::size_t mu) const { return labels_[mu]; }
    std::span<const double> inputs() const { return inputs_; }
    std::span<const double> labels() const { return labels_; }

private:
    std::size_t dim_;
    Vec inputs_;
    Vec labels_;
};

/// Every input entry and every label an independent standard normal draw.
Dataset linreg_generate(std::size_t dim, std::size_t count, RngStream& rng);

/// Standard normal inputs with labels sign(w . x) for a hidden standard
/// normal teacher direction w (drawn first from the same stream).
Dataset binary_teacher_generate(std::size_t dim, std::size_t count, RngStream& rng);

/// CSV with header x_0,...,x_{d-1},y and shortest round-trip decimals.
void write_csv(const Dataset& data, std::ostream& out);
Dataset read_csv(std::istream& in);

}  // namespace sgdlab
