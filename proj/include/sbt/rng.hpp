#ifndef SBT_RNG_HPP
#define SBT_RNG_HPP

#include <cstdint>

namespace sbt {

// Counter-based splittable generator. A stream is identified by
// (seed, stream index); the n-th output depends only on that triple, so
// ensembles can draw from decorrelated streams in any order and still be
// reproducible bit-for-bit. The mixing function is SplitMix64.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    std::uint64_t next_u64() noexcept;

    // Uniform in [0, 1) with 53 random bits.
    double next_double() noexcept;

    // Exact Poisson deviate; inversion for small means, PTRS transformed
    // rejection (Hoermann 1993) for large ones.
    std::uint64_t poisson(double mean);

    // Standard normal via Box-Muller (no cached spare, keeps the stream
    // position a pure function of the draw count).
    double normal() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
    std::uint64_t key_;
};

} // namespace sbt

#endif
