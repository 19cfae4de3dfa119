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
 * The nonlocality game derived from the message protocol. Player messages
 * are the per-repetition outcome pairs; Alice's message additionally
 * carries a fixed-width selection field that derandomizes the referee.
 * The verifier deterministically reconstructs the referee's answer from
 * the messages and accepts iff that answer is in the relation.
 *
 * Strategies: entangled players simulate the quantum pipeline;
 * non-entangled players share randomness and may exchange classical bits
 * under a hard budget enforced by the harness. Classical results are
 * per-baseline evidence only; nothing here quantifies over all classical
 * strategies.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rsmp/analytic.hpp"
#include "rsmp/errors.hpp"
#include "rsmp/instance.hpp"
#include "rsmp/parallel.hpp"
#include "rsmp/protocol.hpp"
#include "rsmp/qsim.hpp"
#include "rsmp/relations.hpp"
#include "rsmp/rng.hpp"

namespace rsmp::game {

/// Game parameters: the verifier is a pure function of (instance,
/// messages) for a given n. nominal_repetitions is the default message
/// length for strategies that do not size their own.
struct Game {
    std::uint32_t n = 0;
    std::uint64_t nominal_repetitions = 0;
    std::uint32_t tn = 0;
};

inline Game make_game(std::uint32_t n, std::uint64_t repetitions) {
    require_usage(n >= 4 && std::has_single_bit(n),
                  "game needs a power-of-two n >= 4");
    const std::uint32_t tn = t_n(n);
    require_usage(repetitions >= tn, "game repetitions below t_n");
    return Game{n, repetitions, tn};
}

/// One player message slot per repetition.
struct MessageSlot {
    std::uint32_t outcome = 0; // i (Alice) or j (Bob), 0..n
    std::uint32_t reg = 0;     // k (Alice) or l (Bob), m bits
};

/// The pair of messages delivered to the verifier.
struct Messages {
    std::vector<MessageSlot> alice;
    std::vector<MessageSlot> bob;
    std::uint64_t selection = 0; // Alice's selection field
};

/// Serialized size of both messages; the selection field width is
/// determined by the message length, so the encoding is self-describing.
inline std::uint64_t message_bits(const Messages &msgs, std::uint32_t n, int m) {
    protocol::Transcript tr;
    const int iw = protocol::outcome_index_width(n);
    const std::uint32_t tn = t_n(n);
    const int sel_width = protocol::selection_field_width(msgs.alice.size(), tn);
    for (const auto &slot : msgs.alice) {
        tr.alice.put(slot.outcome, iw);
        tr.alice.put(slot.reg, m);
    }
    tr.alice.put(sel_width == 64 ? msgs.selection
                                 : msgs.selection & ((std::uint64_t(1) << sel_width) - 1),
                 sel_width);
    for (const auto &slot : msgs.bob) {
        tr.bob.put(slot.outcome, iw);
        tr.bob.put(slot.reg, m);
    }
    return tr.total_bits();
}

/// The deterministic verifier: reconstructs the derandomized referee's
/// answer from the messages and checks it against the relation. Malformed
/// messages lose. Consumes no randomness.
inline bool verify(const Game &game, const Instance &inst, const CellStats &stats,
                   const Messages &msgs) {
    if (inst.n != game.n) return false;
    if (msgs.alice.size() != msgs.bob.size()) return false;
    if (msgs.alice.empty()) return false;
    const int m = inst.m();
    const std::uint32_t reg_mask_bits = m;
    for (const auto &side : {&msgs.alice, &msgs.bob})
        for (const auto &slot : *side)
            if (slot.outcome > inst.n || (slot.reg >> reg_mask_bits) != 0) return false;

    std::vector<Outcome> trace;
    trace.reserve(msgs.alice.size());
    for (std::size_t r = 0; r < msgs.alice.size(); ++r) {
        Outcome out;
        out.i = msgs.alice[r].outcome;
        out.j = msgs.bob[r].outcome;
        out.k = gf2::GF2Vec{msgs.alice[r].reg, m};
        out.l = gf2::GF2Vec{msgs.bob[r].reg, m};
        trace.push_back(out);
    }
    const auto pool = protocol::build_usable_pool(stats, trace);
    const PnnAnswer answer =
        protocol::referee_answer(game.tn, pool, protocol::SelectionBits{msgs.selection});
    return check_pnn(inst, stats, answer);
}

/// Meters interactive classical communication; exceeding the budget
/// forfeits the play (hard cutoff, recorded).
class BudgetMeter {
  public:
    explicit BudgetMeter(std::optional<std::uint64_t> budget) : budget_(budget) {}

    /// Returns false (and marks the forfeit) if sending `bits` would
    /// exceed the budget.
    bool send(std::uint64_t bits) {
        if (budget_.has_value() && used_ + bits > *budget_) {
            forfeited_ = true;
            return false;
        }
        used_ += bits;
        return true;
    }

    std::uint64_t used() const { return used_; }
    bool forfeited() const { return forfeited_; }

  private:
    std::optional<std::uint64_t> budget_;
    std::uint64_t used_ = 0;
    bool forfeited_ = false;
};

class Strategy {
  public:
    virtual ~Strategy() = default;
    virtual std::string name() const = 0;
    virtual std::optional<std::uint64_t> budget_bits() const { return std::nullopt; }
    /// Produce both messages for one play. Communicating strategies must
    /// route every exchanged bit through the meter.
    virtual Messages produce(const Game &game, const Instance &inst,
                             const CellStats &stats, std::uint64_t play_seed,
                             BudgetMeter &meter) = 0;
};

/// Entangled players: run the shared-state pipeline R times; Alice
/// attaches her selection randomness to the message. Repetition streams
/// are derived exactly as in the plain protocol run, so a protocol run
/// with the same seed and selection bits reproduces the verdict.
class EntangledStrategy final : public Strategy {
  public:
    EntangledStrategy(protocol::BackendKind backend, protocol::RepetitionSpec reps)
        : backend_(backend), reps_(reps) {}

    std::string name() const override {
        return std::string("entangled-") + protocol::backend_name(backend_);
    }

    Messages produce(const Game &game, const Instance &inst, const CellStats &stats,
                     std::uint64_t play_seed, BudgetMeter &) override {
        const std::uint64_t reps = reps_.kind == protocol::RepetitionSpec::Kind::automatic
                                       ? reps_.resolve(inst, stats)
                                       : (reps_.kind ==
                                                  protocol::RepetitionSpec::Kind::fixed_rule
                                              ? protocol::fixed_repetitions(inst.n)
                                              : reps_.count);
        std::unique_ptr<RepetitionSampler> sampler;
        if (backend_ == protocol::BackendKind::exact)
            sampler = std::make_unique<qsim::ExactSampler>(inst, stats);
        else
            sampler = std::make_unique<analytic::Sampler>(inst, stats);

        Messages msgs;
        msgs.alice.reserve(reps);
        msgs.bob.reserve(reps);
        for (std::uint64_t rep = 0; rep < reps; ++rep) {
            Rng rep_rng = derive_stream(play_seed, {stream::kRepetition, rep});
            const Outcome out = sampler->sample(rep_rng);
            msgs.alice.push_back(MessageSlot{out.i, out.k.bits});
            msgs.bob.push_back(MessageSlot{out.j, out.l.bits});
        }
        Rng sel_rng = derive_stream(play_seed, {stream::kSelection});
        const int w = protocol::selection_field_width(reps, game.tn);
        msgs.selection = sel_rng.next_u64() >> (64 - w);
        return msgs;
    }

    std::uint64_t resolve_repetitions(const Instance &inst,
                                      const CellStats &stats) const {
        return reps_.resolve(inst, stats);
    }

  private:
    protocol::BackendKind backend_;
    protocol::RepetitionSpec reps_;
};

/// Local players sharing randomness but no entanglement and no
/// communication: they place t_n blind guesses (distinct cells, random
/// nonzero witnesses) directly into the message slots. Alice's slot s and
/// Bob's slot s encode (i_s, k_s) and (j_s, k_s + c_s), so the referee
/// reconstructs exactly the guessed triples. Alice's part depends only on
/// the shared randomness, as does Bob's; neither looks at its input.
class LocalRandomGuessStrategy final : public Strategy {
  public:
    std::string name() const override { return "random_guess"; }

    Messages produce(const Game &game, const Instance &inst, const CellStats &,
                     std::uint64_t play_seed, BudgetMeter &) override {
        Rng shared = derive_stream(play_seed, {stream::kStrategyShared});
        const int m = inst.m();
        const PnnAnswer guess = protocol::random_guess_answer(inst, shared);
        Messages msgs;
        for (const auto &triple : *guess.triples) {
            const std::uint32_t k = shared.bits(m).bits;
            msgs.alice.push_back(MessageSlot{triple.i, k});
            msgs.bob.push_back(MessageSlot{triple.j, k ^ triple.c});
        }
        msgs.selection = 0;
        (void)game;
        return msgs;
    }
};

/// Communicating players under a hard budget: Alice streams (element, row)
/// pairs of her input to Bob; Bob answers on fully known 2-cells and sends
/// the chosen triples back so both can steer the referee to them. Every
/// exchanged bit is metered; the message slots themselves are free (they
/// are the players' outputs, not communication).
class OnewayPrefixStrategy final : public Strategy {
  public:
    explicit OnewayPrefixStrategy(std::uint64_t budget) : budget_(budget) {}

    std::string name() const override { return "oneway_prefix"; }
    std::optional<std::uint64_t> budget_bits() const override { return budget_; }

    Messages produce(const Game &game, const Instance &inst, const CellStats &,
                     std::uint64_t play_seed, BudgetMeter &meter) override {
        Rng shared = derive_stream(play_seed, {stream::kStrategyShared});
        const int m = inst.m();
        const std::uint32_t log2n = std::bit_width(inst.n) - 1;
        const std::uint64_t pair_width = std::uint64_t(m) + log2n;
        const int iw = protocol::outcome_index_width(inst.n);
        // Bob's reply carrying t_n triples (and a 1-bit answered flag).
        const std::uint64_t reply_bits = 1 + std::uint64_t(game.tn) * (2 * iw + m);

        Messages msgs; // all-zero slots abstain by construction
        for (std::uint32_t s = 0; s < game.tn; ++s) {
            msgs.alice.push_back(MessageSlot{0, 0});
            msgs.bob.push_back(MessageSlot{0, 0});
        }

        std::uint64_t prefix_budget =
            budget_ > reply_bits ? budget_ - reply_bits : 0;
        const std::uint64_t pairs = prefix_budget / pair_width;
        if (pairs == 0) {
            if (!meter.send(std::min<std::uint64_t>(budget_, 1))) return msgs;
            return msgs; // nothing fits: abstain
        }
        if (!meter.send(pairs * pair_width)) return msgs;

        const protocol::OnewayResult oneway =
            protocol::oneway_prefix_answer(inst, pairs * pair_width);
        if (!meter.send(reply_bits)) return msgs;
        if (oneway.answer.abstain()) return msgs;

        for (std::uint32_t s = 0; s < game.tn; ++s) {
            const AnswerTriple &triple = (*oneway.answer.triples)[s];
            const std::uint32_t k = shared.bits(m).bits;
            msgs.alice[s] = MessageSlot{triple.i, k};
            msgs.bob[s] = MessageSlot{triple.j, k ^ triple.c};
        }
        return msgs;
    }

  private:
    std::uint64_t budget_;
};

struct PlayResult {
    bool win = false;
    bool forfeited = false;
    std::uint64_t message_bits = 0; // serialized size of both messages
    std::uint64_t comm_bits = 0;    // interactive communication consumed
};

/// One play: the strategy produces messages from the instance and its
/// seed, the meter enforces any budget, the verifier scores. The verifier
/// runs strictly after all streams are dead, and the draw-count audit in
/// the tests pins that it consumes none.
inline PlayResult play(const Game &game, Strategy &strategy, const Instance &inst,
                       const CellStats &stats, std::uint64_t play_seed) {
    BudgetMeter meter(strategy.budget_bits());
    const Messages msgs = strategy.produce(game, inst, stats, play_seed, meter);
    PlayResult res;
    res.forfeited = meter.forfeited();
    res.comm_bits = meter.used();
    res.message_bits = message_bits(msgs, game.n, inst.m());
    res.win = !res.forfeited && verify(game, inst, stats, msgs);
    return res;
}

/// 95% Wilson score interval.
struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

inline WilsonInterval wilson_interval(std::uint64_t wins, std::uint64_t trials) {
    require_usage(trials >= 1, "interval needs at least one trial");
    const double z = 1.959963984540054; // 97.5th normal quantile
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(wins) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return WilsonInterval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct WinRateReport {
    std::string strategy;
    std::uint32_t n = 0;
    std::uint64_t trials = 0;
    std::uint64_t wins = 0;
    std::uint64_t forfeits = 0;
    double rate = 0.0;
    WilsonInterval ci;
    double mean_bits = 0.0; // mean message + interactive bits per play
    std::uint64_t seed = 0;
};

/// Fresh promised instance per trial, independent streams per trial,
/// deterministic aggregation. jobs > 1 parallelizes trials without
/// changing any result.
inline WinRateReport estimate_win_rate(const Game &game, Strategy &strategy,
                                       std::uint64_t n_trials, std::uint64_t master_seed,
                                       unsigned jobs = 1,
                                       std::uint64_t sampler_max_tries = 10000) {
    require_usage(n_trials >= 1, "need at least one trial");
    struct TrialOut {
        bool win = false;
        bool forfeited = false;
        std::uint64_t bits = 0;
    };
    std::vector<TrialOut> out(n_trials);
    parallel_for_index(n_trials, jobs, [&](std::uint64_t trial) {
        Rng inst_rng = derive_stream(master_seed, {stream::kTrial, trial, stream::kInstance});
        PromisedSample sample = sample_promised(game.n, inst_rng, sampler_max_tries);
        const std::uint64_t play_seed =
            derive_seed(master_seed, {stream::kTrial, trial, stream::kProtocol});
        const PlayResult res =
            play(game, strategy, sample.instance, sample.stats, play_seed);
        out[trial] = TrialOut{res.win, res.forfeited, res.message_bits + res.comm_bits};
    });

    WinRateReport rep;
    rep.strategy = strategy.name();
    rep.n = game.n;
    rep.trials = n_trials;
    rep.seed = master_seed;
    std::uint64_t bit_sum = 0;
    for (const auto &t : out) {
        rep.wins += t.win ? 1 : 0;
        rep.forfeits += t.forfeited ? 1 : 0;
        bit_sum += t.bits;
    }
    rep.rate = static_cast<double>(rep.wins) / static_cast<double>(n_trials);
    rep.ci = wilson_interval(rep.wins, n_trials);
    rep.mean_bits = static_cast<double>(bit_sum) / static_cast<double>(n_trials);
    return rep;
}

} // namespace rsmp::game
