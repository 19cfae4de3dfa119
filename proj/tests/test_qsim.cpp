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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rsmp/qsim.hpp"
#include "support/oracles.hpp"

using namespace rsmp;

TEST_CASE("POVM construction: projectors, shared elements, completeness") {
    SECTION("disjoint sets act as projectors") {
        const Instance inst = oracles::projector_instance();
        const auto povm = qsim::build_povm(inst.x, inst.universe());
        CHECK(povm.alpha == 1);
        CHECK(povm.weight(1, 0) == 1.0);
        CHECK(povm.weight(2, 0) == 0.0);
        CHECK(povm.weight(0, 0) == 0.0);  // covered by set 1
        CHECK(povm.weight(0, 63) == 1.0); // uncovered residual
    }
    SECTION("an element in two sets splits its weight") {
        const auto povm = qsim::build_povm({{0, 1}, {1, 2}}, 16);
        CHECK(povm.alpha == 2);
        CHECK(povm.weight(1, 1) == 0.5);
        CHECK(povm.weight(2, 1) == 0.5);
        CHECK(povm.weight(0, 1) == 0.0);
        CHECK(povm.weight(0, 0) == 0.5);
        CHECK(povm.weight(0, 5) == 1.0);
    }
    SECTION("weights sum to exactly alpha at every position") {
        Rng rng(8);
        const Instance inst = sample_product(8, rng);
        const auto povm = qsim::build_povm(inst.x, inst.universe());
        for (std::uint64_t t = 0; t < inst.universe(); ++t) {
            std::uint64_t total = 0;
            for (std::uint32_t i = 0; i <= povm.k; ++i) {
                const auto num = povm.weight_num(i, t);
                REQUIRE(num <= povm.alpha); // weights in [0, 1]
                total += num;
            }
            REQUIRE(total == povm.alpha);
        }
    }
}

TEST_CASE("initial state is maximally entangled across the diagonal") {
    const auto psi = qsim::initial_state(2);
    REQUIRE(psi.m == 4);
    int diag = 0;
    for (std::uint64_t t1 = 0; t1 < 16; ++t1)
        for (std::uint64_t t2 = 0; t2 < 16; ++t2) {
            const auto a = psi.amp[(t1 << 4) | t2];
            if (t1 == t2) {
                REQUIRE(a.real() == Catch::Approx(0.25));
                ++diag;
            } else {
                REQUIRE(std::abs(a) == 0.0);
            }
        }
    CHECK(diag == 16);
    CHECK(psi.norm() == Catch::Approx(1.0).margin(1e-15));
    CHECK_THROWS_AS(qsim::initial_state(32), UsageError);
}

TEST_CASE("hadamard transform is a norm-preserving involution") {
    Rng rng(4);
    qsim::StateVec psi;
    psi.m = 4;
    psi.amp.resize(psi.dim());
    for (auto &a : psi.amp) a = {rng.unit() - 0.5, rng.unit() - 0.5};
    const double norm = psi.norm();
    for (auto &a : psi.amp) a /= norm;

    const auto once = qsim::hadamard_all(psi);
    CHECK(once.norm() == Catch::Approx(1.0).margin(1e-12));
    const auto twice = qsim::hadamard_all(once);
    for (std::size_t idx = 0; idx < psi.amp.size(); ++idx)
        REQUIRE(std::abs(twice.amp[idx] - psi.amp[idx]) < 1e-12);
}

TEST_CASE("joint measurement: branch law and post-state on a known 2-cell") {
    const Instance inst = oracles::projector_instance(); // alpha = 1 both sides
    const auto povmA = qsim::build_povm(inst.x, inst.universe());
    const auto povmB = qsim::build_povm(inst.y, inst.universe());
    const auto psi0 = qsim::initial_state(4);

    // Pr[(1,1)] = |cell|/(4n^2 alpha_x alpha_y) = 2/64.
    Rng rng(6);
    int hits = 0;
    const int draws = 2000;
    qsim::StateVec post_11;
    for (int d = 0; d < draws; ++d) {
        auto [i, j, post] = qsim::measure_povm_pair(psi0, povmA, povmB, rng);
        if (i == 1 && j == 1) {
            ++hits;
            post_11 = std::move(post);
        }
    }
    const double p = 2.0 / 64.0;
    const double sigma = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(double(hits) / draws - p) <= 4 * sigma);
    REQUIRE(hits > 0);

    // Post state is (1/sqrt 2)(|0>|0> + |1>|1>).
    for (std::uint64_t t1 = 0; t1 < 64; ++t1)
        for (std::uint64_t t2 = 0; t2 < 64; ++t2) {
            const auto a = post_11.amp[(t1 << 6) | t2];
            if (t1 == t2 && t1 <= 1)
                REQUIRE(std::abs(a - std::complex<double>(1 / std::sqrt(2.0), 0)) <
                        1e-12);
            else
                REQUIRE(std::abs(a) < 1e-12);
        }

    // After the Hadamard step, sampled pairs always satisfy
    // <k+l, a+b> = 0, and the exact amplitude grid puts mass 2^(1-m) on
    // k + l = 0.
    const auto rotated = qsim::hadamard_all(post_11);
    double mass_zero = 0.0;
    for (std::uint64_t k = 0; k < 64; ++k)
        for (std::uint64_t l = 0; l < 64; ++l) {
            const double pr = std::norm(rotated.amp[(k << 6) | l]);
            if (pr > 1e-20) REQUIRE(gf2::inner_bits((k ^ l), 0 ^ 1) == 0);
            if ((k ^ l) == 0) mass_zero += pr;
        }
    CHECK(mass_zero == Catch::Approx(std::ldexp(1.0, 1 - 6)).margin(1e-12));

    for (int d = 0; d < 500; ++d) {
        const auto [k, l] = qsim::measure_computational(rotated, rng);
        REQUIRE(gf2::inner(gf2::add(k, l), gf2::index_to_vec(0 ^ 1, 6)) == 0);
    }
}

TEST_CASE("exact outcome table: normalization and branch marginals") {
    Rng rng(12);
    const Instance inst = sample_promised(4, rng, 100000).instance;
    const auto table = qsim::outcome_distribution_exact(inst);
    CHECK(std::abs(table.total() - 1.0) < 1e-10);

    const std::uint64_t ax = alpha(inst.x, inst.universe());
    const std::uint64_t ay = alpha(inst.y, inst.universe());
    for (std::uint32_t i = 1; i <= inst.n; ++i)
        for (std::uint32_t j = 1; j <= inst.n; ++j) {
            const double expect = double(oracles::brute_cell(inst, i, j).size()) /
                                  (double(inst.universe()) * ax * ay);
            REQUIRE(std::abs(table.branch(i, j) - expect) < 1e-12);
        }
    CHECK_THROWS_AS(qsim::outcome_distribution_exact([] {
                        Instance big;
                        big.n = 32;
                        return big;
                    }()),
                    UsageError);
}

TEST_CASE("soundness with certainty, exhaustively at n = 4") {
    Rng rng(13);
    const Instance inst = sample_promised(4, rng, 100000).instance;
    const auto table = qsim::outcome_distribution_exact(inst);
    for (std::uint32_t i = 1; i <= inst.n; ++i)
        for (std::uint32_t j = 1; j <= inst.n; ++j) {
            const auto elems = oracles::brute_cell(inst, i, j);
            if (elems.size() != 2) continue;
            const std::uint32_t diff = elems[0] ^ elems[1];
            for (std::uint32_t u = 0; u < 64; ++u)
                if (table.at(i, j, u) > 1e-20)
                    REQUIRE(gf2::inner_bits(u, diff) == 0);
        }
}

TEST_CASE("conditioned on any branch and u, Alice's k is uniform") {
    // This is the identity that justifies the closed-form factorization
    // (k uniform, l = k + u). Checked on the dense amplitude grid.
    const Instance inst = oracles::projector_instance();
    const auto povmA = qsim::build_povm(inst.x, inst.universe());
    const auto povmB = qsim::build_povm(inst.y, inst.universe());
    const auto psi0 = qsim::initial_state(4);

    Rng rng(9);
    int branches_checked = 0;
    for (int d = 0; d < 400 && branches_checked < 3; ++d) {
        auto [i, j, post] = qsim::measure_povm_pair(psi0, povmA, povmB, rng);
        if (!((i == 1 && j == 1) || (i == 0 && j == 0) || (i == 2 && j == 0)))
            continue;
        ++branches_checked;
        const auto rotated = qsim::hadamard_all(post);
        for (std::uint32_t u = 0; u < 64; ++u) {
            const double ref = std::norm(rotated.amp[(0u << 6) | u]);
            for (std::uint32_t k = 1; k < 64; ++k) {
                const double pr = std::norm(rotated.amp[(k << 6) | (k ^ u)]);
                REQUIRE(std::abs(pr - ref) < 1e-12);
            }
        }
    }
    REQUIRE(branches_checked == 3);
}

TEST_CASE("qubit-wise hadamard-basis sampling reproduces the transform's law") {
    Rng rng(15);
    SECTION("single basis state: uniform output") {
        std::vector<std::uint64_t> counts(16, 0);
        for (int d = 0; d < 32000; ++d)
            ++counts[qsim::hadamard_basis_sample({9}, {1.0}, 4, rng)];
        const auto [chi2, dof] =
            oracles::chi_square(counts, std::vector<double>(16, 1.0 / 16), 32000);
        CHECK(dof == 15);
        CHECK(chi2 < 37.7); // 99.9th percentile of chi2(15)
    }
    SECTION("two equal amplitudes: uniform on the orthogonal hyperplane") {
        const std::uint32_t a = 3, b = 9; // diff 10
        std::vector<std::uint64_t> counts(16, 0);
        for (int d = 0; d < 32000; ++d)
            ++counts[qsim::hadamard_basis_sample({a, b}, {1.0, 1.0}, 4, rng)];
        std::vector<double> probs(16, 0.0);
        for (std::uint32_t u = 0; u < 16; ++u)
            if (gf2::inner_bits(u, a ^ b) == 0) probs[u] = 1.0 / 8;
        for (std::uint32_t u = 0; u < 16; ++u)
            if (probs[u] == 0.0) REQUIRE(counts[u] == 0);
        const auto [chi2, dof] = oracles::chi_square(counts, probs, 32000);
        CHECK(dof == 7);
        CHECK(chi2 < 26.0); // 99.9th percentile of chi2(7)
    }
    SECTION("signed amplitudes shift the support") {
        // amplitudes (1, -1) on {0, s}: support flips to the odd coset
        const std::uint32_t s = 5;
        for (int d = 0; d < 500; ++d) {
            const auto u = qsim::hadamard_basis_sample({0, s}, {1.0, -1.0}, 4, rng);
            REQUIRE(gf2::inner_bits(u, s) == 1);
        }
    }
}

TEST_CASE("one-shot exact sampler agrees with the exact table") {
    Rng seed_rng(19);
    const Instance inst = sample_promised(4, seed_rng, 100000).instance;
    const auto table = qsim::outcome_distribution_exact(inst);
    qsim::ExactSampler sampler(inst);

    const int draws = 200000;
    Rng rng(20);
    std::vector<std::uint64_t> branch_counts((inst.n + 1) * (inst.n + 1), 0);
    std::vector<std::uint64_t> resid_u_counts(64, 0);
    std::uint64_t resid_total = 0;
    for (int d = 0; d < draws; ++d) {
        const Outcome out = sampler.sample(rng);
        ++branch_counts[out.i * (inst.n + 1) + out.j];
        if (out.i == 0 && out.j == 0) {
            ++resid_u_counts[out.t().bits];
            ++resid_total;
        }
    }

    std::vector<double> branch_probs((inst.n + 1) * (inst.n + 1), 0.0);
    for (std::uint32_t i = 0; i <= inst.n; ++i)
        for (std::uint32_t j = 0; j <= inst.n; ++j)
            branch_probs[i * (inst.n + 1) + j] = table.branch(i, j);
    const auto [chi2_b, dof_b] = oracles::chi_square(branch_counts, branch_probs, draws);
    INFO("branch chi2 " << chi2_b << " dof " << dof_b);
    CHECK(chi2_b < dof_b + 5 * std::sqrt(2.0 * dof_b) + 10);

    const double resid_p = table.branch(0, 0);
    std::vector<double> u_probs(64, 0.0);
    for (std::uint32_t u = 0; u < 64; ++u) u_probs[u] = table.at(0, 0, u) / resid_p;
    const auto [chi2_u, dof_u] = oracles::chi_square(resid_u_counts, u_probs, resid_total);
    INFO("residual-u chi2 " << chi2_u << " dof " << dof_u);
    CHECK(chi2_u < dof_u + 5 * std::sqrt(2.0 * dof_u) + 10);

    // Alice's k is uniform over GF(2)^m regardless of branch.
    std::vector<std::uint64_t> k_counts(64, 0);
    Rng rng2(21);
    for (int d = 0; d < 64000; ++d) ++k_counts[sampler.sample(rng2).k.bits];
    const auto [chi2_k, dof_k] =
        oracles::chi_square(k_counts, std::vector<double>(64, 1.0 / 64), 64000);
    CHECK(chi2_k < dof_k + 5 * std::sqrt(2.0 * dof_k) + 10);
}

TEST_CASE("outcome invariant: t = k + l") {
    Rng rng(22);
    const Instance inst = oracles::projector_instance();
    qsim::ExactSampler sampler(inst);
    for (int d = 0; d < 100; ++d) {
        const Outcome out = sampler.sample(rng);
        CHECK(out.t() == gf2::add(out.k, out.l));
    }
}
