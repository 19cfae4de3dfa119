// Copyright 2026 The rsmp developers.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Seeded randomness. Every experiment draws from streams derived from one
 * master seed, so reruns are byte-identical and parallel tasks never share
 * a stream.
 *
 * Stream derivation (the fixed mixing function referenced by the docs):
 * starting from the master seed, each path component p is folded in as
 *   s = splitmix64(s ^ (p + 0x9e3779b97f4a7c15))
 * and the final s is expanded by splitmix64 into the state of a
 * xoshiro256** generator. That engine has a constant-cost seeding step,
 * which matters because every repetition of every trial owns a stream.
 * Bounded draws use rejection sampling on raw 64-bit output, so results
 * do not depend on the C++ standard library's distribution
 * implementations.
 */

#pragma once

#include <cstdint>
#include <initializer_list>

#include "rsmp/gf2.hpp"

namespace rsmp {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic RNG stream with a draw counter (used to audit that
/// verifier code consumes no randomness). Engine: xoshiro256**.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto &word : state_) word = s = splitmix64(s);
    }

    std::uint64_t next_u64() {
        ++draws_;
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform integer in [0, bound); bound >= 1. Unbiased via rejection.
    std::uint64_t below(std::uint64_t bound) {
        require_usage(bound >= 1, "Rng::below requires bound >= 1");
        if (bound == 1) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool coin() { return (next_u64() >> 63) != 0; }

    /// m uniform bits as a GF(2)^m vector.
    gf2::GF2Vec bits(int m) {
        const std::uint32_t raw =
            static_cast<std::uint32_t>(next_u64() >> (64 - m));
        return gf2::GF2Vec{raw, m};
    }

    std::uint64_t draw_count() const { return draws_; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    std::uint64_t draws_ = 0;
};

/// Fixed mixing function from (master seed, path) to a stream seed.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t p : path) s = splitmix64(s ^ (p + 0x9e3779b97f4a7c15ULL));
    return s;
}

inline Rng derive_stream(std::uint64_t master,
                         std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(master, path));
}

// Stream tags. Values are part of the reproducibility contract: changing
// them changes every seeded experiment.
namespace stream {
inline constexpr std::uint64_t kInstance = 1;
inline constexpr std::uint64_t kProtocol = 2;
inline constexpr std::uint64_t kReferee = 3;
inline constexpr std::uint64_t kRepetition = 4;
inline constexpr std::uint64_t kStrategyShared = 5;
inline constexpr std::uint64_t kTrial = 6;
inline constexpr std::uint64_t kSelection = 7;
} // namespace stream

} // namespace rsmp
