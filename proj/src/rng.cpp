#include "qmm/rng.hpp"

#include <cmath>
#include <numbers>

namespace qmm {

namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

}  // namespace

std::array<std::uint32_t, 4> RandomStream::philox_block(
    const std::array<std::uint32_t, 4>& counter,
    const std::array<std::uint32_t, 2>& key) noexcept {
    std::array<std::uint32_t, 4> c = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMult0, c[0], hi0, lo0);
        mulhilo(kMult1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
      stream_{std::uint32_t(stream_id), std::uint32_t(stream_id >> 32)},
      seed_(seed) {}

RandomStream RandomStream::substream(std::uint64_t index) const noexcept {
    return RandomStream(seed_, index + 1);
}

void RandomStream::refill() noexcept {
    std::array<std::uint32_t, 4> counter = {
        std::uint32_t(block_), std::uint32_t(block_ >> 32), stream_[0], stream_[1]};
    buf_ = philox_block(counter, key_);
    ++block_;
    buf_pos_ = 0;
}

std::uint64_t RandomStream::next_u64() noexcept {
    if (buf_pos_ > 2) refill();
    std::uint64_t lo = buf_[buf_pos_];
    std::uint64_t hi = buf_[buf_pos_ + 1];
    buf_pos_ += 2;
    return lo | (hi << 32);
}

double RandomStream::uniform() noexcept {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::gaussian() noexcept {
    if (have_spare_gaussian_) {
        have_spare_gaussian_ = false;
        return spare_gaussian_;
    }
    // u1 in (0,1] so the log is finite
    double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_gaussian_ = r * std::sin(angle);
    have_spare_gaussian_ = true;
    return r * std::cos(angle);
}

std::complex<double> RandomStream::complex_gaussian() noexcept {
    double re = gaussian();
    double im = gaussian();
    return {re, im};
}

}  // namespace qmm
