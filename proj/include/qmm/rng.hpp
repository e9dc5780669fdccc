#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace qmm {

/// Counter-based random stream (Philox4x32-10).
///
/// Streams are cheap value types. `substream(i)` derives an independent
/// stream for sample index i from the same seed, so work can be distributed
/// over threads in any order without changing the numbers drawn for a given
/// sample. Two streams are independent whenever (seed, stream id) differ.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

    /// Independent stream for sample #index under the same seed.
    /// Intended for one level of splitting: root stream id is 0,
    /// substreams occupy ids 1..2^64-1.
    RandomStream substream(std::uint64_t index) const noexcept;

    std::uint64_t next_u64() noexcept;
    double uniform() noexcept;          // [0, 1)
    double gaussian() noexcept;         // standard normal, Box-Muller
    std::complex<double> complex_gaussian() noexcept;  // re, im independent N(0,1)

    /// Raw 4x32 block for the given counter, no state change. Exposed for
    /// known-answer tests against the published Philox vectors.
    static std::array<std::uint32_t, 4> philox_block(
        const std::array<std::uint32_t, 4>& counter,
        const std::array<std::uint32_t, 2>& key) noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;  // counter words 2,3
    std::uint64_t block_ = 0;              // counter words 0,1
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;                       // consumed
    bool have_spare_gaussian_ = false;
    double spare_gaussian_ = 0.0;
    std::uint64_t seed_ = 0;
};

}  // namespace qmm
