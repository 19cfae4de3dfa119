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

// Command-line entry point: sample | check | run | xcheck | game | report.
// Every command is a pure function of (flags, input files, seed); reruns
// are byte-identical. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 internal invariant breach.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsmp/analytic.hpp"
#include "rsmp/game.hpp"
#include "rsmp/instance.hpp"
#include "rsmp/json_io.hpp"
#include "rsmp/parallel.hpp"
#include "rsmp/protocol.hpp"
#include "rsmp/qsim.hpp"
#include "rsmp/relations.hpp"

namespace {

using namespace rsmp;
using nlohmann::json;

struct SeedOption {
    std::uint64_t value = 0;
};

protocol::RepetitionSpec parse_reps(const std::string &reps) {
    if (reps == "auto") return protocol::RepetitionSpec::automatic();
    if (reps == "fixed") return protocol::RepetitionSpec::fixed_rule();
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(reps, &used);
        require_usage(used == reps.size() && v > 0, "bad repetition count");
        return protocol::RepetitionSpec::explicit_count(v);
    } catch (const std::exception &) {
        throw UsageError("--reps must be auto, fixed, or a positive integer (got '" +
                         reps + "')");
    }
}

std::string format_rate(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

int cmd_sample(std::uint32_t n, std::uint32_t count, bool promised,
               std::uint64_t seed, const std::string &out_dir,
               std::uint64_t max_tries) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create output directory: " + out_dir);

    for (std::uint32_t idx = 0; idx < count; ++idx) {
        Rng rng = derive_stream(seed, {stream::kInstance, idx});
        Instance inst;
        std::uint64_t tries = 1;
        if (promised) {
            PromisedSample s = sample_promised(n, rng, max_tries);
            inst = std::move(s.instance);
            tries = s.tries;
        } else {
            inst = sample_product(n, rng);
        }
        char name[128];
        std::snprintf(name, sizeof name, "instance-n%u-seed%" PRIu64 "-%03u.json", n,
                      seed, idx);
        const fs::path path = fs::path(out_dir) / name;
        io::write_file(path.string(), io::instance_to_json(inst));
        std::printf("%s tries=%" PRIu64 "\n", path.string().c_str(), tries);
    }
    return 0;
}

int cmd_check(const std::string &instance_path, const std::string &answer_path) {
    const Instance inst = io::instance_from_json(io::read_file(instance_path));
    const CellStats stats = compute_cell_stats(inst);
    const PromiseReport rep = promises_from_stats(inst, stats);
    json j;
    j["n"] = inst.n;
    j["two_cells"] = rep.two_cells;
    j["two_cells_needed"] = rep.two_cells_needed;
    j["max_mult"] = rep.max_mult;
    j["max_mult_allowed"] = rep.max_mult_allowed;
    j["total_cell_mass"] = rep.total_cell_mass;
    j["mass_allowed"] = rep.mass_allowed;
    j["ok_two_cells"] = rep.ok_two_cells;
    j["ok_mult"] = rep.ok_mult;
    j["ok_mass"] = rep.ok_mass;
    j["ok"] = rep.ok;
    if (!answer_path.empty()) {
        const PnnAnswer ans = io::answer_from_json_text(io::read_file(answer_path));
        j["answer_ok"] = check_pnn(inst, stats, ans);
    }
    std::printf("%s\n", j.dump().c_str());
    return 0;
}

int cmd_run(const std::string &instance_path, const std::string &backend_name,
            const std::string &reps, std::uint64_t trials, std::uint64_t seed,
            unsigned jobs, const std::string &out_path) {
    const Instance inst = io::instance_from_json(io::read_file(instance_path));
    const CellStats stats = compute_cell_stats(inst);
    const protocol::BackendKind backend = protocol::backend_from_name(backend_name);
    const protocol::RepetitionSpec spec = parse_reps(reps);
    const std::uint64_t repetitions = spec.resolve(inst, stats);

    if (backend == protocol::BackendKind::exact) qsim::require_exact_size(inst.n);

    struct TrialRow {
        std::string record;
        bool ok = false;
        bool answered = false;
        std::uint64_t bits = 0, epr = 0;
    };
    std::vector<TrialRow> rows(trials);
    parallel_for_index(trials, jobs, [&](std::uint64_t trial) {
        std::unique_ptr<RepetitionSampler> sampler;
        if (backend == protocol::BackendKind::exact)
            sampler = std::make_unique<qsim::ExactSampler>(inst, stats);
        else
            sampler = std::make_unique<analytic::Sampler>(inst, stats);
        const std::uint64_t run_seed =
            derive_seed(seed, {stream::kTrial, trial, stream::kProtocol});
        const protocol::RunResult res =
            protocol::run_pnn_protocol(stats, *sampler, repetitions, run_seed);
        const bool ok = check_pnn(inst, stats, res.answer);
        json rec;
        rec["n"] = inst.n;
        rec["seed"] = run_seed;
        rec["backend"] = backend_name;
        rec["R"] = repetitions;
        rec["answer"] = io::answer_to_json(res.answer);
        rec["ok"] = ok;
        rec["bits"] = res.cost.classical_bits;
        rec["epr"] = res.cost.epr_pairs;
        rows[trial] = TrialRow{rec.dump() + "\n", ok, !res.answer.abstain(),
                               res.cost.classical_bits, res.cost.epr_pairs};
    });

    std::string records;
    std::uint64_t ok_count = 0, answered = 0, bits_sum = 0, epr_sum = 0;
    for (const auto &row : rows) {
        records += row.record;
        ok_count += row.ok ? 1 : 0;
        answered += row.answered ? 1 : 0;
        bits_sum += row.bits;
        epr_sum += row.epr;
    }
    if (!out_path.empty()) io::write_file(out_path, records);
    else std::fputs(records.c_str(), stdout);

    const auto ci = game::wilson_interval(ok_count, std::max<std::uint64_t>(trials, 1));
    json summary;
    summary["trials"] = trials;
    summary["R"] = repetitions;
    summary["successes"] = ok_count;
    summary["success_rate"] = trials ? double(ok_count) / double(trials) : 0.0;
    summary["ci_lo"] = ci.lo;
    summary["ci_hi"] = ci.hi;
    summary["answered"] = answered;
    summary["answer_rate"] = trials ? double(answered) / double(trials) : 0.0;
    summary["conditional_success_rate"] =
        answered ? double(ok_count) / double(answered) : 0.0;
    summary["mean_bits"] = trials ? double(bits_sum) / double(trials) : 0.0;
    summary["mean_epr"] = trials ? double(epr_sum) / double(trials) : 0.0;
    std::printf("%s\n", summary.dump().c_str());
    return 0;
}

int cmd_xcheck(std::uint32_t n, std::uint32_t instances, double tolerance,
               std::uint64_t seed, double perturb, std::uint64_t max_tries) {
    qsim::require_exact_size(n);
    double max_tv = 0.0;
    for (std::uint32_t idx = 0; idx < instances; ++idx) {
        Rng rng = derive_stream(seed, {stream::kInstance, idx});
        PromisedSample s = sample_promised(n, rng, max_tries);
        const qsim::OutcomeTable exact = qsim::outcome_distribution_exact(s.instance);
        const qsim::OutcomeTable closed =
            analytic::closed_form_table(s.instance, s.stats, perturb);
        const double tv = analytic::total_variation(exact, closed);
        max_tv = std::max(max_tv, tv);
        std::printf("instance %u: tv=%.3e\n", idx, tv);
    }
    const bool pass = max_tv <= tolerance;
    std::printf("%s max_tv=%.3e tolerance=%.3e\n", pass ? "PASS" : "FAIL", max_tv,
                tolerance);
    return pass ? 0 : 3;
}

int cmd_game(std::uint32_t n, const std::string &strategy_name, std::uint64_t budget,
             const std::string &reps, std::uint64_t trials, std::uint64_t seed,
             unsigned jobs, const std::string &out_path) {
    const protocol::RepetitionSpec spec = parse_reps(reps);
    std::unique_ptr<game::Strategy> strategy;
    if (strategy_name == "entangled-analytic")
        strategy = std::make_unique<game::EntangledStrategy>(
            protocol::BackendKind::analytic, spec);
    else if (strategy_name == "entangled-exact")
        strategy = std::make_unique<game::EntangledStrategy>(
            protocol::BackendKind::exact, spec);
    else if (strategy_name == "random_guess")
        strategy = std::make_unique<game::LocalRandomGuessStrategy>();
    else if (strategy_name == "oneway_prefix")
        strategy = std::make_unique<game::OnewayPrefixStrategy>(budget);
    else
        throw UsageError("unknown strategy '" + strategy_name +
                         "' (expected entangled-analytic|entangled-exact|"
                         "random_guess|oneway_prefix)");

    const game::Game g = game::make_game(n, std::max<std::uint64_t>(t_n(n), 1));
    const game::WinRateReport rep =
        game::estimate_win_rate(g, *strategy, trials, seed, jobs);

    std::string csv = "strategy,n,trials,wins,rate,ci_lo,ci_hi,mean_bits,seed\n";
    csv += rep.strategy + "," + std::to_string(rep.n) + "," +
           std::to_string(rep.trials) + "," + std::to_string(rep.wins) + "," +
           format_rate(rep.rate) + "," + format_rate(rep.ci.lo) + "," +
           format_rate(rep.ci.hi) + "," + format_rate(rep.mean_bits) + "," +
           std::to_string(rep.seed) + "\n";
    if (!out_path.empty()) io::write_file(out_path, csv);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int cmd_report(const std::vector<std::string> &inputs) {
    struct Bucket {
        std::uint64_t trials = 0, ok = 0, answered = 0, bits = 0, epr = 0;
    };
    std::map<std::pair<std::uint64_t, std::string>, Bucket> buckets;
    for (const auto &path : inputs) {
        std::istringstream in(io::read_file(path));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::parse_error &e) {
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": bad record: " + e.what());
            }
            if (!rec.contains("n") || !rec.contains("backend") || !rec.contains("ok"))
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": record missing n/backend/ok");
            Bucket &b =
                buckets[{rec["n"].get<std::uint64_t>(), rec["backend"].get<std::string>()}];
            ++b.trials;
            b.ok += rec["ok"].get<bool>() ? 1 : 0;
            if (rec.contains("answer") && !rec["answer"].contains("abstain"))
                ++b.answered;
            b.bits += rec.value("bits", 0ULL);
            b.epr += rec.value("epr", 0ULL);
        }
    }
    for (const auto &[key, b] : buckets) {
        const auto ci = game::wilson_interval(b.ok, std::max<std::uint64_t>(b.trials, 1));
        json row;
        row["n"] = key.first;
        row["backend"] = key.second;
        row["trials"] = b.trials;
        row["successes"] = b.ok;
        row["success_rate"] = b.trials ? double(b.ok) / double(b.trials) : 0.0;
        row["ci_lo"] = ci.lo;
        row["ci_hi"] = ci.hi;
        row["answer_rate"] = b.trials ? double(b.answered) / double(b.trials) : 0.0;
        row["mean_bits"] = b.trials ? double(b.bits) / double(b.trials) : 0.0;
        row["mean_epr"] = b.trials ? double(b.epr) / double(b.trials) : 0.0;
        std::printf("%s\n", row.dump().c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Simulator and experiment harness for an entanglement-assisted "
                 "simultaneous message passing protocol and its nonlocality game"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; explicit flags win");

    // sample
    auto *sample = app.add_subcommand("sample", "sample instances to JSON files");
    std::uint32_t s_n = 64, s_count = 1;
    bool s_promised = false;
    std::uint64_t s_seed = 0, s_max_tries = 10000;
    std::string s_out = ".";
    sample->add_option("--n", s_n, "instance size (power of two)")->required();
    sample->add_option("--count", s_count, "number of instances");
    sample->add_flag("--promised", s_promised, "rejection-sample the promised distribution");
    sample->add_option("--seed", s_seed, "master seed")->envname("RSMP_SEED");
    sample->add_option("--out", s_out, "output directory");
    sample->add_option("--max-tries", s_max_tries, "rejection budget per instance");

    // check
    auto *check = app.add_subcommand("check", "check promises (and optionally an answer)");
    std::string c_instance, c_answer;
    check->add_option("--instance", c_instance, "instance JSON file")->required();
    check->add_option("--answer", c_answer, "answer JSON file");

    // run
    auto *run = app.add_subcommand("run", "run the protocol on an instance");
    std::string r_instance, r_backend = "analytic", r_reps = "auto", r_out;
    std::uint64_t r_trials = 1, r_seed = 0;
    unsigned r_jobs = 1;
    run->add_option("--instance", r_instance, "instance JSON file")->required();
    run->add_option("--backend", r_backend, "exact|analytic");
    run->add_option("--reps", r_reps, "auto|fixed|<count>");
    run->add_option("--trials", r_trials, "independent protocol runs");
    run->add_option("--seed", r_seed, "master seed")->envname("RSMP_SEED");
    run->add_option("--jobs", r_jobs, "worker threads");
    run->add_option("--out", r_out, "JSONL output path (default: stdout)");

    // xcheck
    auto *xcheck = app.add_subcommand(
        "xcheck", "total-variation cross-check of the closed form against the "
                  "exact enumeration");
    std::uint32_t x_n = 4, x_instances = 3;
    double x_tol = 1e-9, x_perturb = 0.0;
    std::uint64_t x_seed = 0, x_max_tries = 100000;
    xcheck->add_option("--n", x_n, "instance size (exact backend limit applies)");
    xcheck->add_option("--instances", x_instances, "number of sampled instances");
    xcheck->add_option("--tolerance", x_tol, "max allowed total variation");
    xcheck->add_option("--seed", x_seed, "master seed")->envname("RSMP_SEED");
    xcheck->add_option("--perturb", x_perturb,
                       "test hook: inflate one closed-form weight by this amount");
    xcheck->add_option("--max-tries", x_max_tries, "rejection budget per instance");

    // game
    auto *gamecmd = app.add_subcommand("game", "estimate a strategy's win rate");
    std::uint32_t g_n = 64;
    std::string g_strategy = "entangled-analytic", g_reps = "auto", g_out;
    std::uint64_t g_budget = 0, g_trials = 100, g_seed = 0;
    unsigned g_jobs = 1;
    gamecmd->add_option("--n", g_n, "game size (power of two >= 4)");
    gamecmd->add_option("--strategy", g_strategy,
                        "entangled-analytic|entangled-exact|random_guess|oneway_prefix");
    gamecmd->add_option("--budget", g_budget, "communication budget in bits");
    gamecmd->add_option("--reps", g_reps, "auto|fixed|<count> (entangled strategies)");
    gamecmd->add_option("--trials", g_trials, "number of plays");
    gamecmd->add_option("--seed", g_seed, "master seed")->envname("RSMP_SEED");
    gamecmd->add_option("--jobs", g_jobs, "worker threads");
    gamecmd->add_option("--out", g_out, "CSV output path");

    // report
    auto *report = app.add_subcommand("report", "aggregate JSONL trial records");
    std::vector<std::string> rep_inputs;
    report->add_option("--in", rep_inputs, "JSONL file(s)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sample->parsed())
            return cmd_sample(s_n, s_count, s_promised, s_seed, s_out, s_max_tries);
        if (check->parsed()) return cmd_check(c_instance, c_answer);
        if (run->parsed())
            return cmd_run(r_instance, r_backend, r_reps, r_trials, r_seed, r_jobs,
                           r_out);
        if (xcheck->parsed())
            return cmd_xcheck(x_n, x_instances, x_tol, x_seed, x_perturb, x_max_tries);
        if (gamecmd->parsed())
            return cmd_game(g_n, g_strategy, g_budget, g_reps, g_trials, g_seed,
                            g_jobs, g_out);
        if (report->parsed()) return cmd_report(rep_inputs);
    } catch (const UsageError &e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const DataError &e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const InternalError &e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 0;
}
