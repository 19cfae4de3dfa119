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
 * Bit vectors over GF(2)^m and the integer <-> vector identification used
 * by every other module. Universe elements are 0-based, and index 0 is the
 * additive identity.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "rsmp/errors.hpp"

namespace rsmp::gf2 {

inline constexpr int kMinLen = 2;
inline constexpr int kMaxLen = 30;

/// A vector in GF(2)^m, m carried explicitly. bits < 2^m always holds.
struct GF2Vec {
    std::uint32_t bits = 0;
    int m = kMinLen;
};

inline GF2Vec index_to_vec(std::uint64_t a, int m) {
    require_usage(m >= kMinLen && m <= kMaxLen,
                  "GF2Vec length must be in [2,30], got " + std::to_string(m));
    require_usage(a < (std::uint64_t(1) << m),
                  "index " + std::to_string(a) + " out of range for m=" + std::to_string(m));
    return GF2Vec{static_cast<std::uint32_t>(a), m};
}

inline std::uint32_t vec_to_index(GF2Vec v) { return v.bits; }

inline GF2Vec zero_vec(int m) { return index_to_vec(0, m); }

inline bool is_zero(GF2Vec v) { return v.bits == 0; }

inline GF2Vec add(GF2Vec u, GF2Vec v) {
    require_usage(u.m == v.m, "GF(2) vector length mismatch: " + std::to_string(u.m) +
                                  " vs " + std::to_string(v.m));
    return GF2Vec{u.bits ^ v.bits, u.m};
}

/// Standard GF(2) inner product: parity of the bitwise AND.
inline int inner(GF2Vec u, GF2Vec v) {
    require_usage(u.m == v.m, "GF(2) vector length mismatch: " + std::to_string(u.m) +
                                  " vs " + std::to_string(v.m));
    return std::popcount(u.bits & v.bits) & 1;
}

// Raw-word variants for hot loops; callers guarantee equal lengths.
inline int inner_bits(std::uint32_t u, std::uint32_t v) {
    return std::popcount(u & v) & 1;
}

inline bool operator==(GF2Vec a, GF2Vec b) { return a.m == b.m && a.bits == b.bits; }
inline bool operator!=(GF2Vec a, GF2Vec b) { return !(a == b); }

/// Register width for a universe of 4n^2 elements: m = log2(4n^2).
inline int register_width(std::uint32_t n) {
    require_usage(n >= 2 && std::has_single_bit(n), "n must be a power of two >= 2");
    return 2 * (std::bit_width(n) - 1) + 2;
}

} // namespace rsmp::gf2
