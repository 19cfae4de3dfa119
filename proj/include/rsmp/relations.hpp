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
 * Decidable checkers for the two relational problems. A checker decides
 * whether a proposed answer is in the relation; it never computes "the"
 * answer. Abstention is a first-class answer and always evaluates false;
 * experiment reports track answer-rate and conditional correctness
 * separately.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rsmp/errors.hpp"
#include "rsmp/gf2.hpp"
#include "rsmp/instance.hpp"

namespace rsmp {

/// t_n = floor(log2 log2 n). Defined for powers of two n >= 4.
inline std::uint32_t t_n(std::uint32_t n) {
    require_usage(n >= 4 && std::has_single_bit(n),
                  "t_n requires a power of two n >= 4, got " + std::to_string(n));
    const std::uint32_t log2n = static_cast<std::uint32_t>(std::bit_width(n)) - 1;
    return static_cast<std::uint32_t>(std::bit_width(log2n)) - 1;
}

struct AnswerTriple {
    std::uint32_t i = 0; // 1-based row
    std::uint32_t j = 0; // 1-based column
    std::uint32_t c = 0; // witness element, 0-based

    bool operator==(const AnswerTriple &o) const {
        return i == o.i && j == o.j && c == o.c;
    }
};

/// Either an abstention or a sequence of exactly t_n triples.
struct PnnAnswer {
    std::optional<std::vector<AnswerTriple>> triples; // nullopt = abstain

    bool abstain() const { return !triples.has_value(); }
    static PnnAnswer abstained() { return PnnAnswer{}; }
    static PnnAnswer of(std::vector<AnswerTriple> ts) {
        return PnnAnswer{std::move(ts)};
    }
    bool operator==(const PnnAnswer &o) const { return triples == o.triples; }
};

/// Membership test for the n-by-n relation, using precomputed instance
/// statistics (the verifier calls this in a loop).
///
/// An answer is in the relation iff it is not an abstention, addresses
/// exactly t_n pairwise-distinct cells, every addressed 2-cell {a,b} comes
/// with a nonzero witness c satisfying <c, a+b> = 0, and either at least
/// t_n/66 of the addressed cells are 2-cells or the instance itself has
/// fewer than n^2/65 of them. Threshold comparisons are exact integer
/// arithmetic.
inline bool check_pnn(const Instance &inst, const CellStats &stats,
                      const PnnAnswer &ans) {
    if (ans.abstain()) return false;
    const auto &ts = *ans.triples;
    if (ts.size() != t_n(inst.n)) return false;

    const std::uint64_t universe = inst.universe();
    const int m = inst.m();
    for (const auto &t : ts) {
        require_usage(t.i >= 1 && t.i <= inst.n && t.j >= 1 && t.j <= inst.n,
                      "answer triple indices out of range");
        require_usage(t.c < universe, "answer witness outside the universe");
    }
    for (std::size_t a = 0; a < ts.size(); ++a)
        for (std::size_t b = a + 1; b < ts.size(); ++b)
            if (ts[a].i == ts[b].i && ts[a].j == ts[b].j) return false;

    std::uint64_t two_cell_hits = 0;
    for (const auto &t : ts) {
        const auto elems = cell(inst, t.i, t.j);
        if (elems.size() != 2) continue;
        ++two_cell_hits;
        if (t.c == 0) return false;
        const auto diff = gf2::add(gf2::index_to_vec(elems[0], m),
                                   gf2::index_to_vec(elems[1], m));
        if (gf2::inner(gf2::index_to_vec(t.c, m), diff) != 0) return false;
    }

    const std::uint64_t n2 = std::uint64_t(inst.n) * inst.n;
    const bool enough_hits = two_cell_hits * 66 >= t_n(inst.n);
    const bool sparse_instance = stats.two_cell_count * 65 < n2;
    return enough_hits || sparse_instance;
}

inline bool check_pnn(const Instance &inst, const PnnAnswer &ans) {
    return check_pnn(inst, compute_cell_stats(inst), ans);
}

/// Answer to the 1-by-1 relation: a bare witness, or a witness taken
/// after applying a permutation of the universe to both hidden elements.
struct P11Answer {
    std::optional<std::vector<std::uint32_t>> sigma; // nullopt = plain answer
    std::uint32_t c = 0;
};

/// Membership test for the 1-by-1 relation. x and y must be same-sized
/// power-of-two sets intersecting in exactly two elements; anything else
/// is outside the promise and a usage error.
inline bool check_p11(const std::vector<std::uint32_t> &x,
                      const std::vector<std::uint32_t> &y, const P11Answer &ans) {
    const auto n = static_cast<std::uint32_t>(x.size());
    require_usage(n >= 2 && std::has_single_bit(n) && y.size() == x.size(),
                  "check_p11 requires |x| = |y| = n, n a power of two");
    const std::uint64_t universe = 4ULL * n * n;
    const int m = gf2::register_width(n);
    for (std::uint32_t t : x) require_usage(t < universe, "x element outside universe");
    for (std::uint32_t t : y) require_usage(t < universe, "y element outside universe");

    std::vector<std::uint32_t> common;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(),
                          std::back_inserter(common));
    require_usage(common.size() == 2,
                  "check_p11 requires |x intersect y| = 2, got " +
                      std::to_string(common.size()));
    require_usage(ans.c < universe, "witness outside the universe");

    std::uint32_t a = common[0], b = common[1];
    if (ans.sigma.has_value()) {
        const auto &sigma = *ans.sigma;
        require_usage(sigma.size() == universe,
                      "sigma must be a permutation of the full universe");
        std::vector<bool> seen(universe, false);
        for (std::uint32_t v : sigma) {
            require_usage(v < universe && !seen[v], "sigma is not a bijection");
            seen[v] = true;
        }
        a = sigma[a];
        b = sigma[b];
    }
    if (ans.c == 0) return false;
    const auto diff = gf2::add(gf2::index_to_vec(a, m), gf2::index_to_vec(b, m));
    return gf2::inner(gf2::index_to_vec(ans.c, m), diff) == 0;
}

} // namespace rsmp
