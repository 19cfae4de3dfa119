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

#include <stdexcept>
#include <string>

namespace rsmp {

/// Caller misuse: bad arguments, out-of-range indices, unsupported sizes.
/// Maps to process exit code 1 in the CLI.
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string &msg) : std::invalid_argument(msg) {}
};

/// Malformed or inconsistent input data (files, sampler exhaustion).
/// Maps to process exit code 2 in the CLI.
struct DataError : std::runtime_error {
    explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

/// A broken internal invariant; always a bug. Maps to exit code 3.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string &msg) : std::logic_error(msg) {}
};

inline void require_usage(bool cond, const std::string &msg) {
    if (!cond) throw UsageError(msg);
}

inline void require_data(bool cond, const std::string &msg) {
    if (!cond) throw DataError(msg);
}

inline void require_internal(bool cond, const std::string &msg) {
    if (!cond) throw InternalError(msg);
}

} // namespace rsmp
