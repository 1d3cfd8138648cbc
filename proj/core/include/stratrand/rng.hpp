#pragma once

#include <array>
#include <cstdint>

#include "stratrand/normal.hpp"

namespace stratrand {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
// Implemented here, rather than via <random>, because simulation replications
// must be reproducible bit-for-bit across platforms and thread counts: each
// logical stream is (key, stream id) and the draw index is just a counter.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }
};

// One reproducible random stream: uniforms and normals generated by counting
// Philox blocks. Streams with distinct (seed, stream_id) pairs are
// statistically independent; the same pair always replays the same sequence.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          hi_{stream_id} {}

    std::uint64_t next_u64() {
        const auto out = Philox4x32::block(
            {static_cast<std::uint32_t>(lo_), static_cast<std::uint32_t>(lo_ >> 32),
             static_cast<std::uint32_t>(hi_), static_cast<std::uint32_t>(hi_ >> 32)},
            key_);
        ++lo_;
        return (std::uint64_t{out[1]} << 32) | out[0];
    }

    // Uniform on the open interval (0,1): 53 random bits offset by half a ulp,
    // so 0 and 1 are unreachable and normal_quantile stays finite.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Standard normal via inverse-CDF; exactly one uniform consumed.
    double next_normal() { return normal_quantile(next_unit()); }

    // Uniform integer in [0, n); n must be positive.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    std::uint64_t draws_used() const { return lo_; }

private:
    Philox4x32::Key key_;
    std::uint64_t hi_ = 0;   // stream id
    std::uint64_t lo_ = 0;   // draw counter
};

} // namespace stratrand
