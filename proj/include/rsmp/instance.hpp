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
 * Problem instances: two n-tuples of n-element subsets of a universe of
 * size 4n^2, the cell/multiplicity statistics derived from them, promise
 * checking, and the two input samplers (product distribution, and the
 * promised distribution realized by rejection).
 *
 * Rows and columns are 1-based in every public interface; index 0 is
 * reserved for the measurement's "no outcome" result. Universe elements
 * are 0-based so that element 0 is the additive identity of GF(2)^m.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "rsmp/errors.hpp"
#include "rsmp/gf2.hpp"
#include "rsmp/rng.hpp"

namespace rsmp {

struct Instance {
    std::uint32_t n = 0;
    std::vector<std::vector<std::uint32_t>> x; // n sorted rows, n elements each
    std::vector<std::vector<std::uint32_t>> y; // n sorted columns

    std::uint64_t universe() const { return 4ULL * n * n; }
    int m() const { return gf2::register_width(n); }

    bool operator==(const Instance &other) const {
        return n == other.n && x == other.x && y == other.y;
    }
};

/// Throws UsageError unless the instance is structurally well-formed:
/// power-of-two n, sorted distinct in-range elements, exact set sizes.
inline void validate_instance(const Instance &inst) {
    require_usage(inst.n >= 2 && std::has_single_bit(inst.n),
                  "instance n must be a power of two >= 2, got " + std::to_string(inst.n));
    const std::uint64_t universe = inst.universe();
    auto check_side = [&](const std::vector<std::vector<std::uint32_t>> &side,
                          const char *name) {
        require_usage(side.size() == inst.n,
                      std::string(name) + " must hold exactly n sets");
        for (std::size_t i = 0; i < side.size(); ++i) {
            const auto &s = side[i];
            const std::string where =
                std::string(name) + "[" + std::to_string(i + 1) + "]";
            require_usage(s.size() == inst.n, where + " must have exactly n elements");
            for (std::size_t k = 0; k < s.size(); ++k) {
                require_usage(s[k] < universe,
                              where + " element " + std::to_string(s[k]) +
                                  " outside the universe");
                if (k > 0)
                    require_usage(s[k - 1] < s[k],
                                  where + " must be strictly increasing (duplicate or "
                                          "unsorted at position " +
                                      std::to_string(k) + ")");
            }
        }
    };
    check_side(inst.x, "x");
    check_side(inst.y, "y");
}

/// cell(i, j) = x_i intersect y_j, as a sorted vector. i, j are 1-based.
inline std::vector<std::uint32_t> cell(const Instance &inst, std::uint32_t i,
                                       std::uint32_t j) {
    require_usage(i >= 1 && i <= inst.n, "row index out of range: " + std::to_string(i));
    require_usage(j >= 1 && j <= inst.n,
                  "column index out of range: " + std::to_string(j));
    const auto &a = inst.x[i - 1];
    const auto &b = inst.y[j - 1];
    std::vector<std::uint32_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
}

/// Maximum, over universe elements, of how many of the given sets contain
/// that element. This is the normalization constant of the measurement
/// built from the tuple.
inline std::uint32_t alpha(const std::vector<std::vector<std::uint32_t>> &sets,
                           std::uint64_t universe) {
    require_usage(!sets.empty(), "alpha of an empty tuple is undefined");
    std::vector<std::uint16_t> mult(universe, 0);
    std::uint32_t best = 0;
    for (const auto &s : sets)
        for (std::uint32_t t : s) best = std::max<std::uint32_t>(best, ++mult[t]);
    return best;
}

struct PromiseReport {
    std::uint64_t two_cells = 0;
    std::uint32_t max_mult = 0; // max over elements of |{i : t in x_i or t in y_i}|
    std::uint64_t total_cell_mass = 0;

    std::uint64_t two_cells_needed = 0;  // ceil(n^2 / 65)
    std::uint32_t max_mult_allowed = 0;  // floor(4 sqrt(log2 n))
    std::uint64_t mass_allowed = 0;      // 2 n^2

    bool ok_two_cells = false;
    bool ok_mult = false;
    bool ok_mass = false;
    bool ok = false;
};

struct NonemptyCell {
    std::uint32_t i = 0; // 1-based
    std::uint32_t j = 0;
    std::uint32_t size = 0;
};

/// Derived per-instance statistics shared by the promise checker, the
/// measurement, and both simulation backends. Membership lists are stored
/// CSR-style to keep construction cheap inside sampling loops.
struct CellStats {
    std::vector<std::uint16_t> mult_x, mult_y; // indexed by universe element
    std::uint32_t alpha_x = 0, alpha_y = 0;
    std::uint32_t max_joint_mult = 0;
    std::uint64_t total_mass = 0;    // sum over (i,j) of |cell(i,j)|
    std::uint64_t two_cell_count = 0;
    std::vector<NonemptyCell> cells; // sorted by (i, j)
};

inline CellStats compute_cell_stats(const Instance &inst) {
    const std::uint64_t universe = inst.universe();
    const std::uint32_t n = inst.n;
    CellStats st;
    st.mult_x.assign(universe, 0);
    st.mult_y.assign(universe, 0);
    for (const auto &row : inst.x)
        for (std::uint32_t t : row)
            st.alpha_x = std::max<std::uint32_t>(st.alpha_x, ++st.mult_x[t]);
    for (const auto &col : inst.y)
        for (std::uint32_t t : col)
            st.alpha_y = std::max<std::uint32_t>(st.alpha_y, ++st.mult_y[t]);

    // CSR membership lists: members_x[offs_x[t] .. offs_x[t+1]) lists the
    // rows containing t, in increasing row order.
    auto build_csr = [&](const std::vector<std::vector<std::uint32_t>> &side,
                         const std::vector<std::uint16_t> &mult,
                         std::vector<std::uint32_t> &offs,
                         std::vector<std::uint32_t> &members) {
        offs.assign(universe + 1, 0);
        for (std::uint64_t t = 0; t < universe; ++t) offs[t + 1] = offs[t] + mult[t];
        members.assign(offs[universe], 0);
        std::vector<std::uint32_t> cursor(offs.begin(), offs.end() - 1);
        for (std::uint32_t i = 1; i <= n; ++i)
            for (std::uint32_t t : side[i - 1]) members[cursor[t]++] = i;
    };
    std::vector<std::uint32_t> offs_x, members_x, offs_y, members_y;
    build_csr(inst.x, st.mult_x, offs_x, members_x);
    build_csr(inst.y, st.mult_y, offs_y, members_y);

    // Cell sizes over a flat (i-1)*n + (j-1) table, tracking touched keys.
    std::vector<std::uint16_t> counts(std::size_t(n) * n, 0);
    std::vector<std::uint32_t> touched;
    touched.reserve(universe / 2);
    for (std::uint64_t t = 0; t < universe; ++t) {
        const std::uint32_t rx = st.mult_x[t], ry = st.mult_y[t];
        if (rx != 0 && ry != 0) {
            for (std::uint32_t a = offs_x[t]; a < offs_x[t + 1]; ++a) {
                const std::uint32_t base = (members_x[a] - 1) * n;
                for (std::uint32_t b = offs_y[t]; b < offs_y[t + 1]; ++b) {
                    const std::uint32_t key = base + members_y[b] - 1;
                    if (counts[key]++ == 0) touched.push_back(key);
                }
            }
        }
        if (rx == 0 && ry == 0) continue;
        // |{i : t in x_i or t in y_i}| via merge of the two sorted lists.
        std::uint32_t a = offs_x[t], b = offs_y[t], joint = 0;
        while (a < offs_x[t + 1] || b < offs_y[t + 1]) {
            if (b == offs_y[t + 1] ||
                (a < offs_x[t + 1] && members_x[a] < members_y[b])) ++a;
            else if (a == offs_x[t + 1] || members_y[b] < members_x[a]) ++b;
            else { ++a; ++b; }
            ++joint;
        }
        st.max_joint_mult = std::max(st.max_joint_mult, joint);
    }

    std::sort(touched.begin(), touched.end());
    st.cells.reserve(touched.size());
    for (std::uint32_t key : touched) {
        const std::uint32_t size = counts[key];
        st.cells.push_back(NonemptyCell{key / n + 1, key % n + 1, size});
        st.total_mass += size;
        if (size == 2) ++st.two_cell_count;
    }
    return st;
}

/// floor(4 sqrt(log2 n)) without floating point: the largest integer v
/// with v^2 <= 16 log2 n.
inline std::uint32_t multiplicity_bound(std::uint32_t n) {
    const std::uint32_t log2n = static_cast<std::uint32_t>(std::bit_width(n)) - 1;
    std::uint32_t v = 0;
    while ((v + 1) * (v + 1) <= 16 * log2n) ++v;
    return v;
}

inline PromiseReport promises_from_stats(const Instance &inst, const CellStats &st) {
    PromiseReport rep;
    const std::uint64_t n2 = std::uint64_t(inst.n) * inst.n;
    rep.two_cells = st.two_cell_count;
    rep.max_mult = st.max_joint_mult;
    rep.total_cell_mass = st.total_mass;
    rep.two_cells_needed = (n2 + 64) / 65;
    rep.max_mult_allowed = multiplicity_bound(inst.n);
    rep.mass_allowed = 2 * n2;
    rep.ok_two_cells = rep.two_cells * 65 >= n2;
    rep.ok_mult = rep.max_mult <= rep.max_mult_allowed;
    rep.ok_mass = rep.total_cell_mass <= rep.mass_allowed;
    rep.ok = rep.ok_two_cells && rep.ok_mult && rep.ok_mass;
    return rep;
}

inline PromiseReport check_promises(const Instance &inst) {
    return promises_from_stats(inst, compute_cell_stats(inst));
}

/// One uniformly random n-element subset of [0, universe), sorted.
/// Floyd's algorithm: exactly n bounded draws, no retries. Membership is
/// tracked in an epoch-stamped scratch table so repeated calls do not pay
/// for clearing.
inline std::vector<std::uint32_t> sample_subset(std::uint64_t universe,
                                                std::uint32_t n, Rng &rng) {
    thread_local std::vector<std::uint32_t> stamp;
    thread_local std::uint32_t epoch = 0;
    if (stamp.size() < universe) stamp.assign(universe, 0);
    ++epoch;
    if (epoch == 0) { // stamp wrap-around; start clean
        std::fill(stamp.begin(), stamp.end(), 0);
        epoch = 1;
    }
    std::vector<std::uint32_t> out;
    out.reserve(n);
    for (std::uint64_t j = universe - n; j < universe; ++j) {
        auto t = static_cast<std::uint32_t>(rng.below(j + 1));
        if (stamp[t] == epoch) t = static_cast<std::uint32_t>(j);
        stamp[t] = epoch;
        out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Product distribution: all 2n sets independent and uniform.
inline Instance sample_product(std::uint32_t n, Rng &rng) {
    require_usage(n >= 2 && std::has_single_bit(n),
                  "n must be a power of two >= 2, got " + std::to_string(n));
    Instance inst;
    inst.n = n;
    const std::uint64_t universe = inst.universe();
    inst.x.reserve(n);
    inst.y.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) inst.x.push_back(sample_subset(universe, n, rng));
    for (std::uint32_t j = 0; j < n; ++j) inst.y.push_back(sample_subset(universe, n, rng));
    return inst;
}

struct PromisedSample {
    Instance instance;
    CellStats stats;        // statistics of the accepted instance
    std::uint64_t tries = 0; // attempts consumed, including the accepted one
};

/// Rejection sampler for the promised input distribution. Acceptance is a
/// measured quantity, not an assumption; callers that care record
/// tries/attempts.
inline PromisedSample sample_promised(std::uint32_t n, Rng &rng,
                                      std::uint64_t max_tries = 10000) {
    require_usage(max_tries >= 1, "max_tries must be >= 1");
    std::uint64_t bad_two_cells = 0, bad_mult = 0, bad_mass = 0;
    for (std::uint64_t attempt = 1; attempt <= max_tries; ++attempt) {
        Instance inst = sample_product(n, rng);
        CellStats st = compute_cell_stats(inst);
        const PromiseReport rep = promises_from_stats(inst, st);
        if (rep.ok) return PromisedSample{std::move(inst), std::move(st), attempt};
        if (!rep.ok_two_cells) ++bad_two_cells;
        if (!rep.ok_mult) ++bad_mult;
        if (!rep.ok_mass) ++bad_mass;
    }
    const char *worst = "two-cell count";
    std::uint64_t worst_count = bad_two_cells;
    if (bad_mult > worst_count) { worst = "element multiplicity"; worst_count = bad_mult; }
    if (bad_mass > worst_count) { worst = "total cell mass"; worst_count = bad_mass; }
    throw DataError("rejection sampler exhausted " + std::to_string(max_tries) +
                    " tries at n=" + std::to_string(n) +
                    "; most-violated promise: " + std::string(worst) + " (" +
                    std::to_string(worst_count) + " failures)");
}

} // namespace rsmp
