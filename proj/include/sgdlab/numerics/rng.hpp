#pragma once

#include <cstdint>
#include <span>

namespace sgdlab {

/// Counter-based random stream. Draw i of stream (seed, stream_id) is a fixed
/// function of (seed, stream_id, i), so substreams can be handed to threads
/// in any order without changing what each one produces.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Independent child stream; deterministic in (seed, stream_id, child).
    RngStream substream(std::uint64_t child) const;

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }
    /// Unbiased uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_index(std::uint64_t n);
    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal();
    void fill_normal(std::span<double> out);

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t gamma_;
    std::uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

}  // namespace sgdlab
