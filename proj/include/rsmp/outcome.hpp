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

#pragma once

#include <cstdint>

#include "rsmp/gf2.hpp"
#include "rsmp/instance.hpp"
#include "rsmp/rng.hpp"

namespace rsmp {

/// Raw result of one protocol repetition: the two measurement outcomes of
/// each party. i or j equal to 0 means the residual ("no outcome") branch.
struct Outcome {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    gf2::GF2Vec k;
    gf2::GF2Vec l;

    /// Derived referee value t = k + l.
    gf2::GF2Vec t() const { return gf2::add(k, l); }
};

/// One repetition of the shared-state measurement pipeline. Implemented by
/// the exact state-vector backend and by the closed-form backend.
class RepetitionSampler {
  public:
    virtual ~RepetitionSampler() = default;
    virtual Outcome sample(Rng &rng) = 0;
    virtual const Instance &instance() const = 0;
};

} // namespace rsmp
