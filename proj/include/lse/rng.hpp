// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace lse {

/// PCG32 generator. Each pixel owns a stream keyed by (seed, pixel index),
/// so trace results do not depend on thread scheduling.
class Pcg32 {
public:
    Pcg32() { seed(0x853c49e6748fea9bULL, 0xda3e39cb94b95bdbULL); }
    Pcg32(uint64_t init_state, uint64_t init_seq) { seed(init_state, init_seq); }

    void seed(uint64_t init_state, uint64_t init_seq) {
        state_ = 0u;
        inc_ = (init_seq << 1u) | 1u;
        next_u32();
        state_ += init_state;
        next_u32();
    }

    uint32_t next_u32() {
        const uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const uint32_t xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
        const uint32_t rot = static_cast<uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((~rot + 1u) & 31u));
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return next_u32() * 0x1p-32;
    }

private:
    uint64_t state_ = 0;
    uint64_t inc_ = 0;
};

/// splitmix64, used to decorrelate (seed, index) pairs into PCG init values.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic per-pixel stream.
inline Pcg32 make_pixel_rng(uint64_t seed, uint64_t pixel_index) {
    return Pcg32(mix64(seed), mix64(pixel_index ^ 0x5bf03635ff270f1cULL));
}

}  // namespace lse
