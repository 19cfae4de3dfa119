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

// Test-only oracles and fixtures. brute_check_pnn is an independent
// transcription of the relation definition and must stay decoupled from
// the library's checker.

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "rsmp/instance.hpp"
#include "rsmp/relations.hpp"

namespace oracles {

inline int parity_of_and(std::uint32_t a, std::uint32_t b) {
    int p = 0;
    for (std::uint32_t v = a & b; v; v >>= 1) p ^= static_cast<int>(v & 1);
    return p;
}

inline std::vector<std::uint32_t> brute_cell(const rsmp::Instance &inst,
                                             std::uint32_t i, std::uint32_t j) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t a : inst.x[i - 1])
        for (std::uint32_t b : inst.y[j - 1])
            if (a == b) out.push_back(a);
    std::sort(out.begin(), out.end());
    return out;
}

/// Direct transcription of the n-by-n relation, O(n^3); the reference the
/// library checker is compared against.
inline bool brute_check_pnn(const rsmp::Instance &inst, const rsmp::PnnAnswer &ans) {
    if (ans.abstain()) return false;
    std::uint32_t log2n = 0;
    while ((std::uint64_t(1) << (log2n + 1)) <= inst.n) ++log2n;
    std::uint32_t tn = 0;
    while ((std::uint32_t(1) << (tn + 1)) <= log2n) ++tn;
    const auto &ts = *ans.triples;
    if (ts.size() != tn) return false;

    for (std::size_t a = 0; a < ts.size(); ++a)
        for (std::size_t b = a + 1; b < ts.size(); ++b)
            if (ts[a].i == ts[b].i && ts[a].j == ts[b].j) return false;

    std::uint64_t hits = 0;
    for (const auto &t : ts) {
        const auto elems = brute_cell(inst, t.i, t.j);
        if (elems.size() != 2) continue;
        ++hits;
        if (t.c == 0) return false;
        if (parity_of_and(t.c, elems[0] ^ elems[1]) != 0) return false;
    }

    std::uint64_t two_cells = 0;
    for (std::uint32_t i = 1; i <= inst.n; ++i)
        for (std::uint32_t j = 1; j <= inst.n; ++j)
            if (brute_cell(inst, i, j).size() == 2) ++two_cells;

    const std::uint64_t n2 = std::uint64_t(inst.n) * inst.n;
    return hits * 66 >= tn || two_cells * 65 < n2;
}

// n=4 fixture with exactly one 2-cell, cell(1,1) = {1,2}; satisfies all
// promises.
inline rsmp::Instance two_cell_instance() {
    rsmp::Instance inst;
    inst.n = 4;
    inst.x = {{1, 2, 3, 4}, {10, 11, 12, 13}, {20, 21, 22, 23}, {30, 31, 32, 33}};
    inst.y = {{1, 2, 8, 9}, {40, 41, 42, 43}, {44, 45, 46, 47}, {50, 51, 52, 53}};
    rsmp::validate_instance(inst);
    return inst;
}

// n=4 fixture with cell(1,1) = {1,2,3} (a 3-cell) and cell(2,2) = {8,9}.
inline rsmp::Instance three_cell_instance() {
    rsmp::Instance inst;
    inst.n = 4;
    inst.x = {{1, 2, 3, 4}, {8, 9, 20, 21}, {24, 25, 26, 27}, {34, 35, 36, 37}};
    inst.y = {{1, 2, 3, 10}, {8, 9, 30, 31}, {54, 55, 56, 57}, {60, 61, 62, 63}};
    rsmp::validate_instance(inst);
    return inst;
}

// Disjoint rows and columns (alpha = 1 on both sides) with a single
// 2-cell at (1,1) = {0,1}.
inline rsmp::Instance projector_instance() {
    rsmp::Instance inst;
    inst.n = 4;
    inst.x = {{0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9, 10, 11}, {12, 13, 14, 15}};
    inst.y = {{0, 1, 16, 17}, {18, 19, 20, 21}, {22, 23, 24, 25}, {26, 27, 28, 29}};
    rsmp::validate_instance(inst);
    return inst;
}

// Every cell empty; used for zero-2-cell error paths.
inline rsmp::Instance empty_cells_instance(std::uint32_t n) {
    rsmp::Instance inst;
    inst.n = n;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::vector<std::uint32_t> row, col;
        for (std::uint32_t k = 0; k < n; ++k) {
            row.push_back(i * n + k);
            col.push_back(2 * n * n + i * n + k);
        }
        inst.x.push_back(row);
        inst.y.push_back(col);
    }
    rsmp::validate_instance(inst);
    return inst;
}

/// Chi-square statistic against expected probabilities; bins with expected
/// count below 5 are folded together. Returns {chi2, dof}.
inline std::pair<double, std::size_t> chi_square(const std::vector<std::uint64_t> &counts,
                                                 const std::vector<double> &probs,
                                                 std::uint64_t total) {
    double chi2 = 0.0;
    double rest_obs = 0.0, rest_exp = 0.0;
    std::size_t bins = 0;
    for (std::size_t idx = 0; idx < counts.size(); ++idx) {
        const double expect = probs[idx] * static_cast<double>(total);
        if (expect < 5.0) {
            rest_obs += static_cast<double>(counts[idx]);
            rest_exp += expect;
            continue;
        }
        const double d = static_cast<double>(counts[idx]) - expect;
        chi2 += d * d / expect;
        ++bins;
    }
    if (rest_exp >= 5.0) {
        const double d = rest_obs - rest_exp;
        chi2 += d * d / rest_exp;
        ++bins;
    }
    return {chi2, bins > 0 ? bins - 1 : 0};
}

} // namespace oracles
