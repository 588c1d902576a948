#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fsspack {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 64-bit seed is the key; the upper half of the 128-bit counter selects an
/// independent stream, so replication k of a run always sees the same numbers
/// regardless of scheduling.
class Philox4x32 {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32() = default;
    explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (used_ >= 4) refill();
        const std::uint64_t lo = buffer_[used_++];
        if (used_ >= 4) refill();
        const std::uint64_t hi = buffer_[used_++];
        return (hi << 32) | lo;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Ten-round bijection of one counter block under a key.
    static Block bijection(Block ctr, Key key) {
        constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
        constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    void refill() {
        const Block ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = bijection(ctr, key_);
        ++block_;
        used_ = 0;
    }

    Key key_{0, 0};
    std::uint64_t stream_{0};
    std::uint64_t block_{0};
    Block buffer_{};
    int used_{4};
};

}  // namespace fsspack
