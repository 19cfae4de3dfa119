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
 * Interchange formats. Instances travel as
 *   {"n": int, "x": [[int, ...] x n], "y": [[int, ...] x n]}
 * with inner lists sorted ascending and 0-based elements; answers as
 *   {"triples": [[i, j, c], ...]} or {"abstain": true};
 * 1-by-1 answers as {"c": int} or {"sigma": [int x 4n^2], "c": int}.
 * Serialization is canonical, so identical inputs give identical bytes.
 */

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rsmp/errors.hpp"
#include "rsmp/instance.hpp"
#include "rsmp/relations.hpp"

namespace rsmp::io {

using nlohmann::json;

inline std::string instance_to_json(const Instance &inst) {
    json j;
    j["n"] = inst.n;
    j["x"] = inst.x;
    j["y"] = inst.y;
    return j.dump() + "\n";
}

inline Instance instance_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw DataError(std::string("instance parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j.contains("x") || !j.contains("y"))
        throw DataError("instance must be an object with keys n, x, y");
    if (!j["n"].is_number_unsigned())
        throw DataError("instance field n must be a non-negative integer");
    Instance inst;
    inst.n = j["n"].get<std::uint32_t>();
    auto read_side = [&](const json &side, const char *name) {
        if (!side.is_array())
            throw DataError(std::string("instance field ") + name + " must be an array");
        std::vector<std::vector<std::uint32_t>> out;
        out.reserve(side.size());
        for (const auto &row : side) {
            if (!row.is_array())
                throw DataError(std::string(name) + " entries must be arrays");
            std::vector<std::uint32_t> elems;
            elems.reserve(row.size());
            for (const auto &v : row) {
                if (!v.is_number_unsigned())
                    throw DataError(std::string(name) +
                                    " elements must be non-negative integers");
                elems.push_back(v.get<std::uint32_t>());
            }
            out.push_back(std::move(elems));
        }
        return out;
    };
    inst.x = read_side(j["x"], "x");
    inst.y = read_side(j["y"], "y");
    try {
        validate_instance(inst);
    } catch (const UsageError &e) {
        throw DataError(std::string("instance parse error: ") + e.what());
    }
    return inst;
}

inline json answer_to_json(const PnnAnswer &ans) {
    json j;
    if (ans.abstain()) {
        j["abstain"] = true;
        return j;
    }
    json triples = json::array();
    for (const auto &t : *ans.triples) triples.push_back({t.i, t.j, t.c});
    j["triples"] = std::move(triples);
    return j;
}

inline PnnAnswer answer_from_json(const json &j) {
    if (!j.is_object()) throw DataError("answer must be a JSON object");
    if (j.contains("abstain")) {
        if (!j["abstain"].is_boolean() || !j["abstain"].get<bool>())
            throw DataError("abstain field must be true when present");
        return PnnAnswer::abstained();
    }
    if (!j.contains("triples") || !j["triples"].is_array())
        throw DataError("answer needs a triples array or abstain flag");
    std::vector<AnswerTriple> triples;
    for (const auto &row : j["triples"]) {
        if (!row.is_array() || row.size() != 3 || !row[0].is_number_unsigned() ||
            !row[1].is_number_unsigned() || !row[2].is_number_unsigned())
            throw DataError("each answer triple must be [i, j, c] of integers");
        triples.push_back(AnswerTriple{row[0].get<std::uint32_t>(),
                                       row[1].get<std::uint32_t>(),
                                       row[2].get<std::uint32_t>()});
    }
    return PnnAnswer::of(std::move(triples));
}

inline PnnAnswer answer_from_json_text(const std::string &text) {
    try {
        return answer_from_json(json::parse(text));
    } catch (const json::parse_error &e) {
        throw DataError(std::string("answer parse error: ") + e.what());
    }
}

inline json p11_answer_to_json(const P11Answer &ans) {
    json j;
    if (ans.sigma.has_value()) j["sigma"] = *ans.sigma;
    j["c"] = ans.c;
    return j;
}

inline P11Answer p11_answer_from_json(const json &j) {
    if (!j.is_object() || !j.contains("c") || !j["c"].is_number_unsigned())
        throw DataError("1x1 answer needs an integer field c");
    P11Answer ans;
    ans.c = j["c"].get<std::uint32_t>();
    if (j.contains("sigma")) {
        if (!j["sigma"].is_array()) throw DataError("sigma must be an array");
        std::vector<std::uint32_t> sigma;
        for (const auto &v : j["sigma"]) {
            if (!v.is_number_unsigned())
                throw DataError("sigma entries must be non-negative integers");
            sigma.push_back(v.get<std::uint32_t>());
        }
        ans.sigma = std::move(sigma);
    }
    return ans;
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

} // namespace rsmp::io
