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

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "rsmp/errors.hpp"

namespace rsmp {

/// Runs fn(index) for index in [0, count) on up to `jobs` threads. Each
/// index is processed exactly once; callers write results into
/// index-addressed slots, so output bytes never depend on scheduling.
template <typename Fn>
void parallel_for_index(std::uint64_t count, unsigned jobs, Fn &&fn) {
    require_usage(jobs >= 1, "jobs must be >= 1");
    if (jobs == 1 || count <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const unsigned spawn = static_cast<unsigned>(
        std::min<std::uint64_t>(jobs, count));
    threads.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) threads.emplace_back(worker);
    for (auto &t : threads) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace rsmp
