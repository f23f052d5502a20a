#pragma once

#include <cstdint>

namespace llp {

/// Counter-based random stream.
///
/// The i-th 64-bit output is a SplitMix64 finalizer applied to
/// `key + i * golden`, where `key` is derived from (seed, stream id).  The
/// sequence depends only on integer arithmetic, so a fixed (seed, stream)
/// pair produces the same bits on every platform.  Child streams are keyed
/// from the parent key and a child id, never from the parent's position, so
/// deriving a child does not perturb the parent.
///
/// A stream is single-consumer: hand each thread its own child.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const { return stream_; }

    /// Independent stream keyed by (this stream's key, child_id).
    [[nodiscard]] RngStream child(std::uint64_t child_id) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    /// Uniform integer in [0, n); n > 0.  Unbiased (Lemire rejection).
    std::uint64_t uniform_index(std::uint64_t n);
    /// Standard normal (Marsaglia polar method).
    double normal();

  private:
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t key);

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 output finalizer.
std::uint64_t mix64(std::uint64_t z);

}  // namespace llp
