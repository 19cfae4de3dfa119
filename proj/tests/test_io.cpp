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

#include "rsmp/json_io.hpp"
#include "support/oracles.hpp"

using namespace rsmp;

TEST_CASE("instance serialization round-trips and is canonical") {
    Rng rng(60);
    for (int round = 0; round < 10; ++round) {
        const Instance inst = sample_product(8, rng);
        const std::string text = io::instance_to_json(inst);
        const Instance back = io::instance_from_json(text);
        REQUIRE(back == inst);
        REQUIRE(io::instance_to_json(back) == text); // canonical bytes
    }
}

TEST_CASE("instance parsing rejects malformed inputs with a parse error") {
    SECTION("invalid JSON carries a location") {
        try {
            io::instance_from_json("{\"n\": 4, \"x\": [");
            FAIL("expected a DataError");
        } catch (const DataError &e) {
            CHECK(std::string(e.what()).find("parse error") != std::string::npos);
        }
    }
    SECTION("duplicate element in a row") {
        const std::string text =
            R"({"n":2,"x":[[1,1],[2,3]],"y":[[4,5],[6,7]]})";
        CHECK_THROWS_AS(io::instance_from_json(text), DataError);
    }
    SECTION("n not a power of two") {
        const std::string text =
            R"({"n":3,"x":[[1,2],[2,3],[4,5]],"y":[[4,5],[6,7],[8,9]]})";
        CHECK_THROWS_AS(io::instance_from_json(text), DataError);
    }
    SECTION("missing keys and wrong types") {
        CHECK_THROWS_AS(io::instance_from_json(R"({"n":2,"x":[[1,2],[3,4]]})"),
                        DataError);
        CHECK_THROWS_AS(io::instance_from_json(R"({"n":2,"x":4,"y":[]})"), DataError);
        CHECK_THROWS_AS(
            io::instance_from_json(R"({"n":2,"x":[[1,-2],[3,4]],"y":[[1,2],[3,4]]})"),
            DataError);
    }
}

TEST_CASE("answer serialization covers both forms") {
    const PnnAnswer abstain = PnnAnswer::abstained();
    CHECK(io::answer_from_json(io::answer_to_json(abstain)).abstain());

    const PnnAnswer ans = PnnAnswer::of({{1, 2, 3}, {4, 5, 6}});
    const PnnAnswer back = io::answer_from_json(io::answer_to_json(ans));
    REQUIRE_FALSE(back.abstain());
    CHECK(back == ans);

    CHECK_THROWS_AS(io::answer_from_json_text(R"({"triples":[[1,2]]})"), DataError);
    CHECK_THROWS_AS(io::answer_from_json_text(R"({"abstain":false})"), DataError);
    CHECK_THROWS_AS(io::answer_from_json_text(R"({"foo":1})"), DataError);
}

TEST_CASE("1x1 answer serialization") {
    const P11Answer plain{std::nullopt, 9};
    const auto plain_bk = io::p11_answer_from_json(io::p11_answer_to_json(plain));
    CHECK_FALSE(plain_bk.sigma.has_value());
    CHECK(plain_bk.c == 9);

    std::vector<std::uint32_t> sigma(16);
    for (std::uint32_t i = 0; i < 16; ++i) sigma[i] = 15 - i;
    const P11Answer permuted{sigma, 4};
    const auto perm_bk = io::p11_answer_from_json(io::p11_answer_to_json(permuted));
    REQUIRE(perm_bk.sigma.has_value());
    CHECK(*perm_bk.sigma == sigma);
    CHECK_THROWS_AS(io::p11_answer_from_json(nlohmann::json::object()), DataError);
}
