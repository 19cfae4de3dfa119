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
 * The simultaneous-message protocol around the single-repetition
 * samplers: parallel repetitions, the referee that assembles an answer
 * from usable triples, exact repetition sizing, transcript serialization
 * for cost accounting, and the classical baseline strategies used as
 * empirical foils.
 *
 * A repetition's triple (i, j, t) is usable when i and j are both
 * nonzero, t is nonzero, and cell(i, j) has size exactly 2. The referee
 * deduplicates usable triples by cell, keeping the earliest repetition,
 * and answers with t_n of them selected uniformly without replacement;
 * with fewer than t_n usable cells it abstains. The selection can be
 * driven either by the referee's own random stream or by an explicit bit
 * field, which is how the nonlocality game derandomizes the referee.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsmp/analytic.hpp"
#include "rsmp/errors.hpp"
#include "rsmp/gf2.hpp"
#include "rsmp/instance.hpp"
#include "rsmp/outcome.hpp"
#include "rsmp/qsim.hpp"
#include "rsmp/relations.hpp"
#include "rsmp/rng.hpp"

namespace rsmp::protocol {

enum class BackendKind { exact, analytic };

inline const char *backend_name(BackendKind b) {
    return b == BackendKind::exact ? "exact" : "analytic";
}

inline BackendKind backend_from_name(const std::string &name) {
    if (name == "exact") return BackendKind::exact;
    if (name == "analytic") return BackendKind::analytic;
    throw UsageError("unknown backend '" + name + "' (expected exact|analytic)");
}

/// Communication bookkeeping of one protocol run. classical_bits counts
/// the bits actually serialized into the two messages; epr_pairs counts
/// the m shared pairs each repetition consumes.
struct CostReport {
    std::uint64_t classical_bits = 0;
    std::uint64_t epr_pairs = 0;
    std::uint64_t repetitions = 0;
};

/// MSB-first bit packer used for transcripts and game messages.
class BitWriter {
  public:
    void put(std::uint64_t value, int width) {
        require_usage(width >= 0 && width <= 64, "bit field width out of range");
        require_usage(width == 64 || value < (std::uint64_t(1) << width),
                      "bit field value does not fit its width");
        int remaining = width;
        while (remaining > 0) {
            const std::size_t byte = bits_ >> 3;
            if (byte == bytes_.size()) bytes_.push_back(0);
            const int free_bits = 8 - static_cast<int>(bits_ & 7);
            const int chunk = std::min(free_bits, remaining);
            const std::uint64_t piece =
                (value >> (remaining - chunk)) & ((std::uint64_t(1) << chunk) - 1);
            bytes_[byte] |= static_cast<std::uint8_t>(piece << (free_bits - chunk));
            bits_ += chunk;
            remaining -= chunk;
        }
    }

    std::uint64_t bit_count() const { return bits_; }
    const std::vector<std::uint8_t> &bytes() const { return bytes_; }

  private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t bits_ = 0;
};

class BitReader {
  public:
    BitReader(const std::vector<std::uint8_t> &bytes, std::uint64_t bit_count)
        : bytes_(bytes), total_(bit_count) {}

    std::uint64_t get(int width) {
        require_data(pos_ + width <= total_, "bit stream truncated");
        std::uint64_t v = 0;
        for (int b = 0; b < width; ++b) {
            const std::size_t byte = pos_ >> 3;
            v = (v << 1) | ((bytes_[byte] >> (7 - (pos_ & 7))) & 1u);
            ++pos_;
        }
        return v;
    }

    std::uint64_t remaining() const { return total_ - pos_; }

  private:
    const std::vector<std::uint8_t> &bytes_;
    std::uint64_t total_ = 0;
    std::uint64_t pos_ = 0;
};

/// Width of the per-repetition outcome index field: values 0..n.
inline int outcome_index_width(std::uint32_t n) {
    return std::bit_width(n); // ceil(log2(n+1)) for any n >= 1
}

/// C(k, r) saturating at uint64 max.
inline std::uint64_t binom_saturating(std::uint64_t k, std::uint32_t r) {
    if (r > k) return 0;
    unsigned __int128 acc = 1;
    for (std::uint32_t s = 1; s <= r; ++s) {
        acc = acc * (k - r + s) / s; // exact: product of s consecutive ints
        if (acc > (unsigned __int128)UINT64_MAX) return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(acc);
}

/// Bits needed to index any t_n-subset of a pool of at most max_usable
/// triples, clamped to one machine word.
inline int selection_field_width(std::uint64_t max_usable, std::uint32_t tn) {
    const std::uint64_t combos = binom_saturating(max_usable, tn);
    if (combos <= 1) return 1;
    if (combos == UINT64_MAX) return 64;
    int w = 0;
    while ((std::uint64_t(1) << w) < combos && w < 64) ++w;
    return std::max(w, 1);
}

/// Lexicographic unranking of an r-subset of {0..k-1}.
inline std::vector<std::uint32_t> unrank_combination(std::uint64_t k, std::uint32_t r,
                                                     std::uint64_t rank) {
    std::vector<std::uint32_t> out;
    out.reserve(r);
    std::uint64_t start = 0;
    for (std::uint32_t slot = 0; slot < r; ++slot) {
        for (std::uint64_t v = start; v < k; ++v) {
            const std::uint64_t cnt = binom_saturating(k - 1 - v, r - 1 - slot);
            if (rank < cnt) {
                out.push_back(static_cast<std::uint32_t>(v));
                start = v + 1;
                break;
            }
            rank -= cnt;
        }
    }
    require_internal(out.size() == r, "combination unranking failed");
    return out;
}

/// A deduplicated usable triple: the answer candidate (i, j, c = t) plus
/// the repetition index it came from.
struct UsableTriple {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    std::uint32_t t_value = 0;
    std::uint64_t rep = 0;
};

inline std::uint32_t cell_size_of(const CellStats &stats, std::uint32_t i,
                                  std::uint32_t j) {
    const auto it = std::lower_bound(
        stats.cells.begin(), stats.cells.end(), std::pair{i, j},
        [](const NonemptyCell &c, const std::pair<std::uint32_t, std::uint32_t> &k) {
            return c.i != k.first ? c.i < k.first : c.j < k.second;
        });
    if (it == stats.cells.end() || it->i != i || it->j != j) return 0;
    return it->size;
}

/// Filters a repetition trace down to the usable pool: nonzero triples on
/// 2-cells, deduplicated by cell keeping the earliest repetition, sorted
/// by (i, j). Deterministic in the multiset of outcomes, so permuting
/// repetition order cannot change the pool.
inline std::vector<UsableTriple> build_usable_pool(const CellStats &stats,
                                                   const std::vector<Outcome> &trace) {
    std::vector<UsableTriple> pool;
    for (std::size_t rep = 0; rep < trace.size(); ++rep) {
        const Outcome &out = trace[rep];
        if (out.i == 0 || out.j == 0) continue;
        const std::uint32_t t = out.t().bits;
        if (t == 0) continue;
        if (cell_size_of(stats, out.i, out.j) != 2) continue;
        pool.push_back(UsableTriple{out.i, out.j, t, rep});
    }
    std::sort(pool.begin(), pool.end(), [](const UsableTriple &a, const UsableTriple &b) {
        if (a.i != b.i) return a.i < b.i;
        if (a.j != b.j) return a.j < b.j;
        return a.rep < b.rep;
    });
    std::vector<UsableTriple> dedup;
    for (const auto &u : pool)
        if (dedup.empty() || dedup.back().i != u.i || dedup.back().j != u.j)
            dedup.push_back(u);
    return dedup;
}

/// How the referee picks t_n pool entries: from its own stream, or
/// deterministically from an explicit bit field (the derandomized form).
struct SelectionBits {
    std::uint64_t bits = 0;
};

inline std::vector<std::uint32_t> select_indices(std::uint64_t pool_size,
                                                 std::uint32_t tn, Rng &rng) {
    // Partial Fisher-Yates over the index range; result sorted.
    std::vector<std::uint32_t> idx(pool_size);
    for (std::uint64_t v = 0; v < pool_size; ++v) idx[v] = static_cast<std::uint32_t>(v);
    for (std::uint32_t s = 0; s < tn; ++s) {
        const auto pick = s + rng.below(pool_size - s);
        std::swap(idx[s], idx[pick]);
    }
    idx.resize(tn);
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline std::vector<std::uint32_t> select_indices(std::uint64_t pool_size,
                                                 std::uint32_t tn, SelectionBits bits) {
    const std::uint64_t combos = binom_saturating(pool_size, tn);
    const std::uint64_t rank = combos == UINT64_MAX ? bits.bits : bits.bits % combos;
    return unrank_combination(pool_size, tn, rank);
}

/// Assembles the referee's answer from the usable pool: t_n distinct-cell
/// triples, each reported as (i, j, c = t); abstains when the pool is too
/// small.
template <typename SelectionSource>
PnnAnswer referee_answer(std::uint32_t tn, const std::vector<UsableTriple> &pool,
                         SelectionSource &&sel) {
    if (pool.size() < tn) return PnnAnswer::abstained();
    const auto chosen = select_indices(pool.size(), tn,
                                       std::forward<SelectionSource>(sel));
    std::vector<AnswerTriple> triples;
    triples.reserve(tn);
    for (std::uint32_t idx : chosen)
        triples.push_back(AnswerTriple{pool[idx].i, pool[idx].j, pool[idx].t_value});
    return PnnAnswer::of(std::move(triples));
}

/// Exact per-repetition probability that a single run of the measurement
/// pipeline yields a usable triple, as a reduced fraction num/den:
/// p* = 2 * #2cells * (2^m - 2) / (4n^2 * alpha_x * alpha_y * 2^m).
struct UsableRate {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline UsableRate usable_probability(const Instance &inst, const CellStats &stats) {
    const int m = inst.m();
    const unsigned __int128 num = (unsigned __int128)(2 * stats.two_cell_count) *
                                  ((std::uint64_t(1) << m) - 2);
    const unsigned __int128 den = (unsigned __int128)inst.universe() * stats.alpha_x *
                                  stats.alpha_y * (std::uint64_t(1) << m);
    // Reduce by 2^k to keep the pair inside uint64 for all supported n.
    unsigned __int128 a = num, b = den;
    while (a && (a & 1) == 0 && (b & 1) == 0) {
        a >>= 1;
        b >>= 1;
    }
    require_internal(b <= UINT64_MAX && a <= UINT64_MAX,
                     "usable-rate fraction exceeds 64 bits");
    return UsableRate{static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b)};
}

/// Repetition count targeting an expected usable count of 4 (t_n + 2):
/// R = ceil(4 (t_n + 2) / p*). Exact integer arithmetic throughout.
inline std::uint64_t auto_repetitions(const Instance &inst, const CellStats &stats) {
    require_data(stats.two_cell_count > 0,
                 "instance has no 2-cells: outside the promise, usable "
                 "probability is zero");
    const std::uint32_t tn = t_n(inst.n);
    const UsableRate p = usable_probability(inst, stats);
    const unsigned __int128 want = (unsigned __int128)4 * (tn + 2) * p.den;
    const unsigned __int128 r = (want + p.num - 1) / p.num;
    require_internal(r <= UINT64_MAX, "repetition count exceeds 64 bits");
    return static_cast<std::uint64_t>(r);
}

inline std::uint64_t auto_repetitions(const Instance &inst) {
    return auto_repetitions(inst, compute_cell_stats(inst));
}

/// Instance-blind repetition count for fixed-R runs, tuned on typical
/// promised instances: R(n) = 2080 * log2(n) * (t_n + 3).
inline std::uint64_t fixed_repetitions(std::uint32_t n) {
    const std::uint64_t log2n = std::bit_width(n) - 1;
    return 2080ULL * log2n * (t_n(n) + 3);
}

struct RepetitionSpec {
    enum class Kind { automatic, fixed_rule, explicit_count } kind = Kind::automatic;
    std::uint64_t count = 0; // used by explicit_count

    static RepetitionSpec automatic() { return {}; }
    static RepetitionSpec fixed_rule() {
        return RepetitionSpec{Kind::fixed_rule, 0};
    }
    static RepetitionSpec explicit_count(std::uint64_t r) {
        return RepetitionSpec{Kind::explicit_count, r};
    }

    std::uint64_t resolve(const Instance &inst, const CellStats &stats) const {
        switch (kind) {
        case Kind::automatic: return auto_repetitions(inst, stats);
        case Kind::fixed_rule: return fixed_repetitions(inst.n);
        default: return count;
        }
    }
};

/// The two one-message-per-party transcripts of a run, bit-packed.
struct Transcript {
    BitWriter alice;
    BitWriter bob;
    std::uint64_t total_bits() const { return alice.bit_count() + bob.bit_count(); }
};

inline Transcript serialize_transcript(const std::vector<Outcome> &trace,
                                       std::uint32_t n, int m) {
    Transcript tr;
    const int iw = outcome_index_width(n);
    for (const Outcome &out : trace) {
        tr.alice.put(out.i, iw);
        tr.alice.put(out.k.bits, m);
        tr.bob.put(out.j, iw);
        tr.bob.put(out.l.bits, m);
    }
    return tr;
}

struct RunResult {
    PnnAnswer answer;
    CostReport cost;
    std::vector<Outcome> trace;
    std::uint64_t kept_triples = 0;   // nonzero triples before the 2-cell filter
    std::uint64_t usable_draws = 0;   // repetitions that produced a usable triple
    std::uint64_t usable_cells = 0;   // deduplicated usable pool size
};

/// Runs R independent repetitions and applies the referee. Repetition
/// streams are derived from (run_seed, repetition index), so the result
/// does not depend on execution order. When selection_bits is provided the
/// referee is deterministic given the trace (the game's derandomized
/// form); otherwise it draws from its own stream.
inline RunResult run_pnn_protocol(const CellStats &stats, RepetitionSampler &sampler,
                                  std::uint64_t repetitions, std::uint64_t run_seed,
                                  std::optional<SelectionBits> selection_bits = {}) {
    const Instance &inst = sampler.instance();
    const std::uint32_t tn = t_n(inst.n);
    require_usage(repetitions >= tn,
                  "repetition count below t_n cannot produce an answer");

    RunResult res;
    res.trace.reserve(repetitions);
    for (std::uint64_t rep = 0; rep < repetitions; ++rep) {
        Rng rep_rng = derive_stream(run_seed, {stream::kRepetition, rep});
        res.trace.push_back(sampler.sample(rep_rng));
    }
    for (const Outcome &out : res.trace)
        if (out.i != 0 && out.j != 0 && out.t().bits != 0) {
            ++res.kept_triples;
            if (cell_size_of(stats, out.i, out.j) == 2) ++res.usable_draws;
        }

    const auto pool = build_usable_pool(stats, res.trace);
    res.usable_cells = pool.size();
    if (selection_bits.has_value()) {
        res.answer = referee_answer(tn, pool, *selection_bits);
    } else {
        Rng referee_rng = derive_stream(run_seed, {stream::kReferee});
        res.answer = referee_answer(tn, pool, referee_rng);
    }

    const Transcript tr = serialize_transcript(res.trace, inst.n, inst.m());
    res.cost.classical_bits = tr.total_bits();
    res.cost.epr_pairs = repetitions * inst.m();
    res.cost.repetitions = repetitions;
    return res;
}

// ---------------------------------------------------------------------------
// Classical baselines (empirical foils; no claim of optimality).
// ---------------------------------------------------------------------------

/// Blind guessing: t_n distinct cells chosen uniformly, each with a
/// uniformly random nonzero witness.
inline PnnAnswer random_guess_answer(const Instance &inst, Rng &rng) {
    const std::uint32_t tn = t_n(inst.n);
    std::vector<AnswerTriple> triples;
    triples.reserve(tn);
    while (triples.size() < tn) {
        const auto i = static_cast<std::uint32_t>(1 + rng.below(inst.n));
        const auto j = static_cast<std::uint32_t>(1 + rng.below(inst.n));
        bool dup = false;
        for (const auto &t : triples) dup = dup || (t.i == i && t.j == j);
        if (dup) continue;
        const auto c = static_cast<std::uint32_t>(1 + rng.below(inst.universe() - 1));
        triples.push_back(AnswerTriple{i, j, c});
    }
    std::sort(triples.begin(), triples.end(),
              [](const AnswerTriple &a, const AnswerTriple &b) {
                  return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    return PnnAnswer::of(std::move(triples));
}

/// Smallest nonzero witness orthogonal to s (s != 0). One of {1, 2, 3}.
inline std::uint32_t smallest_witness(std::uint32_t s) {
    if ((s & 1u) == 0) return 1;
    if ((s & 2u) == 0) return 2;
    return 3;
}

struct OnewayResult {
    PnnAnswer answer;
    std::uint64_t bits_sent = 0; // Alice -> Bob communication actually used
};

/// One-way baseline under a hard bit budget: Alice transmits
/// floor(budget / (m + log2 n)) (element, row) pairs of her input in
/// row-major order; Bob intersects fully transmitted rows with his columns
/// and answers on 2-cells he knows completely, with the smallest valid
/// witness. Abstains unless t_n such cells exist.
inline OnewayResult oneway_prefix_answer(const Instance &inst, std::uint64_t budget_bits) {
    const std::uint32_t tn = t_n(inst.n);
    const std::uint32_t log2n = std::bit_width(inst.n) - 1;
    const std::uint64_t pair_width = std::uint64_t(inst.m()) + log2n;
    const std::uint64_t pairs = budget_bits / pair_width;

    OnewayResult res;
    res.bits_sent = pairs * pair_width;
    const std::uint64_t complete_rows = std::min<std::uint64_t>(pairs / inst.n, inst.n);
    if (complete_rows == 0) return res; // abstain

    const int m = inst.m();
    std::vector<AnswerTriple> found;
    for (std::uint32_t i = 1; i <= complete_rows && found.size() < tn; ++i)
        for (std::uint32_t j = 1; j <= inst.n && found.size() < tn; ++j) {
            const auto elems = cell(inst, i, j);
            if (elems.size() != 2) continue;
            const std::uint32_t s = elems[0] ^ elems[1];
            found.push_back(AnswerTriple{i, j, smallest_witness(s)});
            (void)m;
        }
    if (found.size() < tn) return res; // abstain
    res.answer = PnnAnswer::of(std::move(found));
    return res;
}

} // namespace rsmp::protocol
