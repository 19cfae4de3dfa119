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

#include <numeric>

#include "rsmp/relations.hpp"
#include "support/oracles.hpp"

using namespace rsmp;

TEST_CASE("t_n schedule") {
    CHECK(t_n(4) == 1);
    CHECK(t_n(64) == 2);
    CHECK(t_n(256) == 3);
    CHECK(t_n(65536) == 4);
    CHECK_THROWS_AS(t_n(2), UsageError);
    CHECK_THROWS_AS(t_n(48), UsageError);
}

TEST_CASE("the hand-built 2-cell answer cases") {
    const Instance inst = oracles::two_cell_instance(); // cell(1,1) = {1,2}
    // a + b = 1 ^ 2 = 3; witnesses must be nonzero and orthogonal to it.
    const PnnAnswer good = PnnAnswer::of({{1, 1, 4}});
    const PnnAnswer zero_witness = PnnAnswer::of({{1, 1, 0}});
    const PnnAnswer bad_witness = PnnAnswer::of({{1, 1, 1}});
    const PnnAnswer sum_witness = PnnAnswer::of({{1, 1, 3}}); // <3,3> = 0

    CHECK(check_pnn(inst, good));
    CHECK_FALSE(check_pnn(inst, zero_witness));
    CHECK_FALSE(check_pnn(inst, bad_witness));
    CHECK(check_pnn(inst, sum_witness));
    CHECK_FALSE(check_pnn(inst, PnnAnswer::abstained()));

    // Brute-force oracle agrees on each case.
    CHECK(oracles::brute_check_pnn(inst, good));
    CHECK_FALSE(oracles::brute_check_pnn(inst, zero_witness));
    CHECK_FALSE(oracles::brute_check_pnn(inst, bad_witness));
    CHECK(oracles::brute_check_pnn(inst, sum_witness));
}

TEST_CASE("a 3-cell answer fails when the instance is 2-cell rich") {
    // cell(1,1) has size 3 and the instance has one 2-cell, which at n=4
    // meets the n^2/65 threshold, so the escape clause cannot fire.
    const Instance inst = oracles::three_cell_instance();
    const PnnAnswer on_three = PnnAnswer::of({{1, 1, 5}});
    CHECK_FALSE(check_pnn(inst, on_three));
    CHECK_FALSE(oracles::brute_check_pnn(inst, on_three));

    // The same shape of answer is fine when the instance has no 2-cells
    // at all (the escape clause fires).
    const Instance empty = oracles::empty_cells_instance(4);
    const PnnAnswer anywhere = PnnAnswer::of({{1, 2, 7}});
    CHECK(check_pnn(empty, anywhere));
    CHECK(oracles::brute_check_pnn(empty, anywhere));
}

TEST_CASE("shape violations: duplicates and wrong length") {
    Rng rng(3);
    const Instance inst = sample_promised(16, rng).instance; // t_n = 2
    const PnnAnswer dup = PnnAnswer::of({{1, 1, 5}, {1, 1, 6}});
    CHECK_FALSE(check_pnn(inst, dup));
    const PnnAnswer wrong_len = PnnAnswer::of({{1, 1, 5}});
    CHECK_FALSE(check_pnn(inst, wrong_len));
    const PnnAnswer out_of_range = PnnAnswer::of({{1, 17, 5}, {2, 2, 6}});
    CHECK_THROWS_AS(check_pnn(inst, out_of_range), UsageError);
}

TEST_CASE("checker matches the brute-force oracle on random answers") {
    Rng rng(1234);
    int agreements = 0;
    for (int round = 0; round < 40; ++round) {
        const Instance inst = sample_product(8, rng); // t_n(8) = 1
        for (int k = 0; k < 12; ++k) {
            const auto i = static_cast<std::uint32_t>(1 + rng.below(8));
            const auto j = static_cast<std::uint32_t>(1 + rng.below(8));
            const auto c = static_cast<std::uint32_t>(rng.below(256));
            const PnnAnswer ans = PnnAnswer::of({{i, j, c}});
            REQUIRE(check_pnn(inst, ans) == oracles::brute_check_pnn(inst, ans));
            ++agreements;
        }
    }
    CHECK(agreements == 480);
}

TEST_CASE("replacing an invalid triple by a valid 2-cell triple never breaks a "
          "true answer") {
    Rng rng(77);
    for (int round = 0; round < 60; ++round) {
        const Instance inst = sample_product(16, rng); // t_n = 2
        const CellStats st = compute_cell_stats(inst);
        if (st.two_cell_count == 0) continue;

        // Random answer, then swap its first triple for a verified 2-cell
        // triple on a cell the answer does not already address.
        const auto i1 = static_cast<std::uint32_t>(1 + rng.below(16));
        const auto j1 = static_cast<std::uint32_t>(1 + rng.below(16));
        const auto i2 = static_cast<std::uint32_t>(1 + rng.below(16));
        const auto j2 = static_cast<std::uint32_t>(1 + rng.below(16));
        if (i1 == i2 && j1 == j2) continue;
        const auto c1 = static_cast<std::uint32_t>(rng.below(1024));
        const auto c2 = static_cast<std::uint32_t>(rng.below(1024));
        const PnnAnswer before = PnnAnswer::of({{i1, j1, c1}, {i2, j2, c2}});

        const NonemptyCell *target = nullptr;
        for (const auto &cellrec : st.cells)
            if (cellrec.size == 2 && !(cellrec.i == i2 && cellrec.j == j2)) {
                target = &cellrec;
                break;
            }
        if (target == nullptr) continue;
        const auto elems = cell(inst, target->i, target->j);
        std::uint32_t witness = 0;
        for (std::uint32_t c = 1; c < 1024; ++c)
            if (oracles::parity_of_and(c, elems[0] ^ elems[1]) == 0) {
                witness = c;
                break;
            }
        REQUIRE(witness != 0);
        const PnnAnswer after =
            PnnAnswer::of({{target->i, target->j, witness}, {i2, j2, c2}});

        const bool ok_before = check_pnn(inst, st, before);
        const bool ok_after = check_pnn(inst, st, after);
        INFO("round " << round);
        CHECK_FALSE((ok_before && !ok_after));
        CHECK(ok_after == oracles::brute_check_pnn(inst, after));
    }
}

TEST_CASE("1x1 relation checker") {
    // x and y are 4-subsets of [64] sharing exactly {a, b}.
    const std::vector<std::uint32_t> x{1, 2, 3, 4};
    const std::vector<std::uint32_t> y{1, 2, 8, 9}; // a=1, b=2, a+b=3
    SECTION("plain answers") {
        CHECK(check_p11(x, y, P11Answer{std::nullopt, 4}));
        CHECK(check_p11(x, y, P11Answer{std::nullopt, 3})); // <3,3> even
        CHECK_FALSE(check_p11(x, y, P11Answer{std::nullopt, 1}));
        CHECK_FALSE(check_p11(x, y, P11Answer{std::nullopt, 0}));
    }
    SECTION("odd-weight sum used as its own witness fails") {
        const std::vector<std::uint32_t> y2{1, 3, 8, 9}; // a=1, b=3, a+b=2
        CHECK_FALSE(check_p11(x, y2, P11Answer{std::nullopt, 2}));
    }
    SECTION("identity permutation reduces to the plain answer") {
        std::vector<std::uint32_t> sigma(64);
        std::iota(sigma.begin(), sigma.end(), 0);
        for (std::uint32_t c = 0; c < 64; ++c)
            CHECK(check_p11(x, y, P11Answer{sigma, c}) ==
                  check_p11(x, y, P11Answer{std::nullopt, c}));
    }
    SECTION("a real permutation moves the hidden pair") {
        std::vector<std::uint32_t> sigma(64);
        std::iota(sigma.begin(), sigma.end(), 0);
        std::swap(sigma[1], sigma[5]); // sigma(a)=5, sigma(b)=2 -> sum 7
        CHECK(check_p11(x, y, P11Answer{sigma, 8}));        // <8,7> = 0
        CHECK_FALSE(check_p11(x, y, P11Answer{sigma, 1}));  // <1,7> = 1
    }
    SECTION("promise and bijection violations are usage errors") {
        CHECK_THROWS_AS(check_p11(x, x, P11Answer{std::nullopt, 4}), UsageError);
        std::vector<std::uint32_t> bad(64, 0);
        CHECK_THROWS_AS(check_p11(x, y, P11Answer{bad, 4}), UsageError);
        std::vector<std::uint32_t> short_sigma{0, 1, 2};
        CHECK_THROWS_AS(check_p11(x, y, P11Answer{short_sigma, 4}), UsageError);
    }
}
