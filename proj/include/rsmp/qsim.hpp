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
 * Exact state-vector simulation of one repetition of the shared-state
 * protocol: maximally entangled initial state, commuting diagonal POVMs
 * with square-root Kraus updates, Hadamard transforms on both registers,
 * computational-basis measurement.
 *
 * This module is the ground truth the closed-form backend is checked
 * against, so it deliberately avoids the interference identities that
 * backend exploits: the exact outcome table is produced by full
 * two-register Walsh-Hadamard transforms, and one-shot sampling measures
 * the registers qubit by qubit.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rsmp/errors.hpp"
#include "rsmp/gf2.hpp"
#include "rsmp/instance.hpp"
#include "rsmp/outcome.hpp"
#include "rsmp/rng.hpp"

namespace rsmp::qsim {

/// Largest n the exact backend accepts; the dense state has 2^(2m) = 16 n^4
/// amplitudes, which at n=16 is already a million.
inline constexpr std::uint32_t kMaxExactN = 16;

inline void require_exact_size(std::uint32_t n) {
    require_usage(n <= kMaxExactN,
                  "exact backend supports n <= " + std::to_string(kMaxExactN) +
                      " (requested n=" + std::to_string(n) +
                      "); use the analytic backend for larger sizes");
}

/// Commuting-elements POVM built from a tuple of sets: element idx >= 1
/// weights the basis states of set idx by 1/alpha, element 0 is the
/// residual making the family complete. Weights are exact rationals with
/// common denominator alpha.
struct DiagonalPOVM {
    std::uint64_t universe = 0;
    std::uint32_t k = 0;     // number of set elements (outcomes 1..k)
    std::uint32_t alpha = 1; // common denominator
    std::vector<std::vector<std::uint32_t>> sets;
    std::vector<std::uint16_t> mult;

    /// Exact numerator of the weight of element idx at position t (the
    /// weight itself is num/alpha).
    std::uint32_t weight_num(std::uint32_t idx, std::uint64_t t) const {
        require_usage(idx <= k, "POVM element index out of range");
        require_usage(t < universe, "POVM position out of range");
        if (idx == 0) return alpha - mult[t];
        const auto &s = sets[idx - 1];
        return std::binary_search(s.begin(), s.end(), static_cast<std::uint32_t>(t))
                   ? 1u
                   : 0u;
    }

    double weight(std::uint32_t idx, std::uint64_t t) const {
        return static_cast<double>(weight_num(idx, t)) / alpha;
    }
};

inline DiagonalPOVM build_povm(const std::vector<std::vector<std::uint32_t>> &sets,
                               std::uint64_t universe) {
    require_usage(!sets.empty(), "POVM needs a non-empty tuple of sets");
    DiagonalPOVM povm;
    povm.universe = universe;
    povm.k = static_cast<std::uint32_t>(sets.size());
    povm.sets = sets;
    povm.mult.assign(universe, 0);
    std::uint32_t alpha = 0;
    for (const auto &s : sets)
        for (std::uint32_t t : s) {
            require_usage(t < universe, "set element outside the universe");
            alpha = std::max<std::uint32_t>(alpha, ++povm.mult[t]);
        }
    povm.alpha = std::max<std::uint32_t>(alpha, 1);
    return povm;
}

/// Dense pure state of the two m-qubit registers, indexed (t1 << m) | t2.
struct StateVec {
    int m = 0;
    std::vector<std::complex<double>> amp;

    std::size_t dim() const { return std::size_t(1) << (2 * m); }
    double norm() const {
        double s = 0;
        for (const auto &a : amp) s += std::norm(a);
        return std::sqrt(s);
    }
};

/// The shared entangled state (1/2n) sum_t |t>|t>.
inline StateVec initial_state(std::uint32_t n) {
    require_usage(n >= 2 && std::has_single_bit(n), "n must be a power of two >= 2");
    require_exact_size(n);
    StateVec psi;
    psi.m = gf2::register_width(n);
    psi.amp.assign(psi.dim(), {0.0, 0.0});
    const std::uint64_t side = std::uint64_t(1) << psi.m; // = 4n^2
    const double a = 1.0 / (2.0 * n);
    for (std::uint64_t t = 0; t < side; ++t) psi.amp[(t << psi.m) | t] = a;
    return psi;
}

namespace detail {

/// In-place Walsh-Hadamard butterflies over `qubits` bits; no scaling.
template <typename T>
void wht_no_scale(std::vector<T> &v, int qubits) {
    const std::size_t size = std::size_t(1) << qubits;
    require_internal(v.size() == size, "WHT length mismatch");
    for (int q = 0; q < qubits; ++q) {
        const std::size_t half = std::size_t(1) << q;
        for (std::size_t base = 0; base < size; base += 2 * half)
            for (std::size_t off = 0; off < half; ++off) {
                T a = v[base + off];
                T b = v[base + half + off];
                v[base + off] = a + b;
                v[base + half + off] = a - b;
            }
    }
}

} // namespace detail

/// Hadamard transform on every qubit of both registers. Unitary, an
/// involution.
inline StateVec hadamard_all(StateVec psi) {
    detail::wht_no_scale(psi.amp, 2 * psi.m);
    const double scale = std::ldexp(1.0, -psi.m); // (1/sqrt2)^(2m)
    for (auto &a : psi.amp) a *= scale;
    return psi;
}

/// Joint POVM measurement. Samples (i, j) with probability
/// <psi| E_i (x) E_j |psi> and applies the square-root Kraus update, which
/// for diagonal elements is the entrywise square root.
inline std::tuple<std::uint32_t, std::uint32_t, StateVec>
measure_povm_pair(const StateVec &psi, const DiagonalPOVM &povmA,
                  const DiagonalPOVM &povmB, Rng &rng) {
    const std::uint64_t side = std::uint64_t(1) << psi.m;
    require_usage(povmA.universe == side && povmB.universe == side,
                  "POVM universe does not match the state dimension");

    // row_mass[j][t1] = sum_t2 |psi(t1,t2)|^2 wB_j[t2]
    std::vector<std::vector<double>> row_mass(
        povmB.k + 1, std::vector<double>(side, 0.0));
    for (std::uint64_t t1 = 0; t1 < side; ++t1)
        for (std::uint64_t t2 = 0; t2 < side; ++t2) {
            const double p = std::norm(psi.amp[(t1 << psi.m) | t2]);
            if (p == 0.0) continue;
            for (std::uint32_t j = 0; j <= povmB.k; ++j) {
                const double w = povmB.weight(j, t2);
                if (w != 0.0) row_mass[j][t1] += p * w;
            }
        }
    std::vector<double> prob((povmA.k + 1) * (povmB.k + 1), 0.0);
    double total = 0.0;
    for (std::uint32_t i = 0; i <= povmA.k; ++i)
        for (std::uint32_t j = 0; j <= povmB.k; ++j) {
            double p = 0.0;
            for (std::uint64_t t1 = 0; t1 < side; ++t1) {
                const double w = povmA.weight(i, t1);
                if (w != 0.0) p += w * row_mass[j][t1];
            }
            prob[i * (povmB.k + 1) + j] = p;
            total += p;
        }
    require_internal(std::abs(total - 1.0) < 1e-9,
                     "POVM branch probabilities do not sum to 1");

    const double r = rng.unit() * total;
    double acc = 0.0;
    std::uint32_t pick_i = 0, pick_j = 0;
    bool found = false;
    for (std::uint32_t i = 0; i <= povmA.k && !found; ++i)
        for (std::uint32_t j = 0; j <= povmB.k; ++j) {
            const double p = prob[i * (povmB.k + 1) + j];
            if (p == 0.0) continue;
            acc += p;
            if (r < acc) {
                pick_i = i;
                pick_j = j;
                found = true;
                break;
            }
        }
    if (!found) { // float edge: land on the last positive branch
        for (std::uint32_t i = povmA.k + 1; i-- > 0 && !found;)
            for (std::uint32_t j = povmB.k + 1; j-- > 0;)
                if (prob[i * (povmB.k + 1) + j] > 0.0) {
                    pick_i = i;
                    pick_j = j;
                    found = true;
                    break;
                }
    }

    const double branch_p = prob[pick_i * (povmB.k + 1) + pick_j];
    require_internal(branch_p > 1e-18, "sampled a vanishing POVM branch");
    StateVec post;
    post.m = psi.m;
    post.amp.assign(psi.dim(), {0.0, 0.0});
    const double inv = 1.0 / std::sqrt(branch_p);
    for (std::uint64_t t1 = 0; t1 < side; ++t1) {
        const double wa = povmA.weight(pick_i, t1);
        if (wa == 0.0) continue;
        for (std::uint64_t t2 = 0; t2 < side; ++t2) {
            const double wb = povmB.weight(pick_j, t2);
            if (wb == 0.0) continue;
            const auto idx = (t1 << psi.m) | t2;
            post.amp[idx] = psi.amp[idx] * (std::sqrt(wa * wb) * inv);
        }
    }
    require_internal(std::abs(post.norm() - 1.0) < 1e-9,
                     "post-measurement state not normalized");
    return {pick_i, pick_j, std::move(post)};
}

/// Computational-basis measurement of both registers.
inline std::pair<gf2::GF2Vec, gf2::GF2Vec> measure_computational(const StateVec &psi,
                                                                 Rng &rng) {
    double total = 0.0;
    for (const auto &a : psi.amp) total += std::norm(a);
    require_internal(total > 1e-12, "cannot measure a zero state");
    const double r = rng.unit() * total;
    double acc = 0.0;
    std::size_t pick = psi.amp.size() - 1;
    for (std::size_t idx = 0; idx < psi.amp.size(); ++idx) {
        const double p = std::norm(psi.amp[idx]);
        if (p == 0.0) continue;
        acc += p;
        if (r < acc) {
            pick = idx;
            break;
        }
    }
    const auto k = static_cast<std::uint32_t>(pick >> psi.m);
    const auto l = static_cast<std::uint32_t>(pick & ((std::uint64_t(1) << psi.m) - 1));
    return {gf2::GF2Vec{k, psi.m}, gf2::GF2Vec{l, psi.m}};
}

/// Exact joint law of one repetition, aggregated over u = k + l:
/// table(i, j, u) = Pr[outcome pair (i, j) and k + l = u].
struct OutcomeTable {
    std::uint32_t n = 0;
    int m = 0;
    // joint[(i * (n+1) + j) * 2^m + u]
    std::vector<double> joint;

    double at(std::uint32_t i, std::uint32_t j, std::uint32_t u) const {
        return joint[(std::size_t(i) * (n + 1) + j) << m | u];
    }
    double branch(std::uint32_t i, std::uint32_t j) const {
        double s = 0.0;
        const std::size_t base = (std::size_t(i) * (n + 1) + j) << m;
        for (std::size_t u = 0; u < (std::size_t(1) << m); ++u) s += joint[base + u];
        return s;
    }
    double total() const {
        double s = 0.0;
        for (double v : joint) s += v;
        return s;
    }
};

/// Enumerates every measurement branch of the exact pipeline and the full
/// distribution of u = k + l within each branch, by brute-force transforms
/// of the dense two-register state.
inline OutcomeTable outcome_distribution_exact(const Instance &inst) {
    require_exact_size(inst.n);
    const DiagonalPOVM povmA = build_povm(inst.x, inst.universe());
    const DiagonalPOVM povmB = build_povm(inst.y, inst.universe());
    const int m = inst.m();
    const std::uint64_t side = std::uint64_t(1) << m;
    const double init_amp = 1.0 / (2.0 * inst.n);

    OutcomeTable table;
    table.n = inst.n;
    table.m = m;
    table.joint.assign((std::size_t(inst.n) + 1) * (inst.n + 1) << m, 0.0);

    std::vector<double> phi; // branch state; real amplitudes throughout
    for (std::uint32_t i = 0; i <= inst.n; ++i)
        for (std::uint32_t j = 0; j <= inst.n; ++j) {
            phi.assign(std::size_t(1) << (2 * m), 0.0);
            bool nonzero = false;
            for (std::uint64_t t = 0; t < side; ++t) {
                const double w = povmA.weight(i, t) * povmB.weight(j, t);
                if (w == 0.0) continue;
                phi[(t << m) | t] = init_amp * std::sqrt(w);
                nonzero = true;
            }
            if (!nonzero) continue;
            detail::wht_no_scale(phi, 2 * m);
            const double scale = std::ldexp(1.0, -2 * m); // amplitude^2 scale
            const std::size_t base = (std::size_t(i) * (inst.n + 1) + j) << m;
            for (std::uint64_t k = 0; k < side; ++k)
                for (std::uint64_t l = 0; l < side; ++l) {
                    const double a = phi[(k << m) | l];
                    if (a == 0.0) continue;
                    table.joint[base + (k ^ l)] += a * a * scale;
                }
        }
    require_internal(std::abs(table.total() - 1.0) < 1e-10,
                     "exact outcome table does not sum to 1");
    return table;
}

/// Samples the computational-basis outcome of H^(x)m applied to the sparse
/// real state given by (positions, amplitudes), one qubit at a time.
/// Positions must be strictly increasing; amplitudes need not be
/// normalized. Runs in O(m * support).
inline std::uint32_t hadamard_basis_sample(const std::vector<std::uint32_t> &positions,
                                           const std::vector<double> &amps, int m,
                                           Rng &rng) {
    require_usage(positions.size() == amps.size() && !positions.empty(),
                  "empty or mismatched sparse state");
    thread_local std::vector<std::uint32_t> cur_t, nxt_t;
    thread_local std::vector<double> cur_a, nxt_a;
    cur_t.assign(positions.begin(), positions.end());
    cur_a.assign(amps.begin(), amps.end());

    std::uint32_t u = 0;
    for (int q = m - 1; q >= 0; --q) {
        const std::uint32_t bit = std::uint32_t(1) << q;
        const std::size_t size = cur_t.size();
        std::size_t split = 0;
        while (split < size && cur_t[split] < bit) ++split;

        // Pass 1: branch masses for outcome bit 0 / 1.
        double s0 = 0.0, s1 = 0.0;
        {
            std::size_t a = 0, b = split;
            while (a < split || b < size) {
                if (b == size || (a < split && cur_t[a] < (cur_t[b] - bit))) {
                    s0 += cur_a[a] * cur_a[a];
                    s1 += cur_a[a] * cur_a[a];
                    ++a;
                } else if (a == split || (cur_t[b] - bit) < cur_t[a]) {
                    s0 += cur_a[b] * cur_a[b];
                    s1 += cur_a[b] * cur_a[b];
                    ++b;
                } else {
                    const double lo = cur_a[a], hi = cur_a[b];
                    s0 += (lo + hi) * (lo + hi);
                    s1 += (lo - hi) * (lo - hi);
                    ++a;
                    ++b;
                }
            }
        }
        require_internal(s0 + s1 > 0.0, "collapse sampler hit a zero state");
        const int beta = (rng.unit() * (s0 + s1) < s0) ? 0 : 1;
        if (beta) u |= bit;
        const double sign = beta ? -1.0 : 1.0;

        // Pass 2: materialize the collapsed state on the remaining bits.
        nxt_t.clear();
        nxt_a.clear();
        std::size_t a = 0, b = split;
        while (a < split || b < size) {
            if (b == size || (a < split && cur_t[a] < (cur_t[b] - bit))) {
                nxt_t.push_back(cur_t[a]);
                nxt_a.push_back(cur_a[a]);
                ++a;
            } else if (a == split || (cur_t[b] - bit) < cur_t[a]) {
                nxt_t.push_back(cur_t[b] - bit);
                nxt_a.push_back(sign * cur_a[b]);
                ++b;
            } else {
                const double v = cur_a[a] + sign * cur_a[b];
                if (v != 0.0) {
                    nxt_t.push_back(cur_t[a]);
                    nxt_a.push_back(v);
                }
                ++a;
                ++b;
            }
        }
        cur_t.swap(nxt_t);
        cur_a.swap(nxt_a);
    }
    return u;
}

/// One-shot exact backend for protocol runs at n <= 16. Branch
/// probabilities come from the diagonal overlap of the initial state with
/// the POVM pair; the post-measurement register contents are then measured
/// qubit by qubit (Alice's register first, then Bob's, whose amplitudes
/// carry the signs (-1)^<k,t>).
class ExactSampler final : public RepetitionSampler {
  public:
    explicit ExactSampler(const Instance &inst)
        : inst_(inst), stats_(compute_cell_stats(inst)), m_(inst.m()) {
        require_exact_size(inst.n);
        build_branches();
    }

    ExactSampler(const Instance &inst, CellStats stats)
        : inst_(inst), stats_(std::move(stats)), m_(inst.m()) {
        require_exact_size(inst.n);
        build_branches();
    }

    const Instance &instance() const override { return inst_; }

    Outcome sample(Rng &rng) override {
        const double r = rng.unit() * cumulative_.back();
        const std::size_t pos =
            std::upper_bound(cumulative_.begin(), cumulative_.end(), r) -
            cumulative_.begin();
        const auto &br = branches_[std::min(pos, branches_.size() - 1)];

        const auto &sup = support(br);
        Outcome out;
        out.i = br.i;
        out.j = br.j;
        out.k = rng.bits(m_); // diagonal branch state: Alice's bits are uniform
        thread_local std::vector<double> signed_amps;
        signed_amps.resize(sup.amps.size());
        for (std::size_t idx = 0; idx < sup.amps.size(); ++idx) {
            const int s = gf2::inner_bits(out.k.bits, sup.positions[idx]);
            signed_amps[idx] = s ? -sup.amps[idx] : sup.amps[idx];
        }
        out.l = gf2::GF2Vec{hadamard_basis_sample(sup.positions, signed_amps, m_, rng),
                            m_};
        return out;
    }

  private:
    struct Branch {
        std::uint32_t i = 0, j = 0;
        double prob = 0.0;
    };
    struct Support {
        std::vector<std::uint32_t> positions;
        std::vector<double> amps;
    };

    void build_branches() {
        const std::uint64_t universe = inst_.universe();
        const double ax = stats_.alpha_x, ay = stats_.alpha_y;
        const double denom = static_cast<double>(universe) * ax * ay;

        double resid = 0.0;
        std::vector<double> row_resid(inst_.n + 1, 0.0), col_resid(inst_.n + 1, 0.0);
        for (std::uint64_t t = 0; t < universe; ++t) {
            const double wx = ax - stats_.mult_x[t];
            const double wy = ay - stats_.mult_y[t];
            resid += wx * wy;
        }
        for (std::uint32_t i = 1; i <= inst_.n; ++i)
            for (std::uint32_t t : inst_.x[i - 1])
                row_resid[i] += ay - stats_.mult_y[t];
        for (std::uint32_t j = 1; j <= inst_.n; ++j)
            for (std::uint32_t t : inst_.y[j - 1])
                col_resid[j] += ax - stats_.mult_x[t];

        auto push = [&](std::uint32_t i, std::uint32_t j, double num) {
            if (num <= 0.0) return;
            branches_.push_back(Branch{i, j, num / denom});
        };
        push(0, 0, resid);
        for (std::uint32_t i = 1; i <= inst_.n; ++i) push(i, 0, row_resid[i]);
        for (std::uint32_t j = 1; j <= inst_.n; ++j) push(0, j, col_resid[j]);
        for (const auto &c : stats_.cells) push(c.i, c.j, c.size);

        cumulative_.reserve(branches_.size());
        double acc = 0.0;
        for (const auto &b : branches_) cumulative_.push_back(acc += b.prob);
        require_internal(std::abs(acc - 1.0) < 1e-9,
                         "exact branch distribution does not sum to 1");
    }

    const Support &support(const Branch &br) {
        const std::uint64_t key = (std::uint64_t(br.i) << 32) | br.j;
        auto it = support_cache_.find(key);
        if (it != support_cache_.end()) return it->second;

        Support sup;
        const std::uint64_t universe = inst_.universe();
        if (br.i != 0 && br.j != 0) {
            for (std::uint32_t t : cell(inst_, br.i, br.j)) {
                sup.positions.push_back(t);
                sup.amps.push_back(1.0);
            }
        } else if (br.i != 0) {
            for (std::uint32_t t : inst_.x[br.i - 1]) {
                const double w = stats_.alpha_y - stats_.mult_y[t];
                if (w > 0.0) {
                    sup.positions.push_back(t);
                    sup.amps.push_back(std::sqrt(w));
                }
            }
        } else if (br.j != 0) {
            for (std::uint32_t t : inst_.y[br.j - 1]) {
                const double w = stats_.alpha_x - stats_.mult_x[t];
                if (w > 0.0) {
                    sup.positions.push_back(t);
                    sup.amps.push_back(std::sqrt(w));
                }
            }
        } else {
            for (std::uint64_t t = 0; t < universe; ++t) {
                const double w = double(stats_.alpha_x - stats_.mult_x[t]) *
                                 double(stats_.alpha_y - stats_.mult_y[t]);
                if (w > 0.0) {
                    sup.positions.push_back(static_cast<std::uint32_t>(t));
                    sup.amps.push_back(std::sqrt(w));
                }
            }
        }
        require_internal(!sup.positions.empty(), "sampled branch has empty support");
        return support_cache_.emplace(key, std::move(sup)).first->second;
    }

    Instance inst_;
    CellStats stats_;
    int m_;
    std::vector<Branch> branches_;
    std::vector<double> cumulative_;
    std::unordered_map<std::uint64_t, Support> support_cache_;
};

} // namespace rsmp::qsim
