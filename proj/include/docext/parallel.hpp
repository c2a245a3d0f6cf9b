///////////////////////////////////////////////////////////////////////
// File:        parallel.hpp
// Description: Bounded index-parallel loop with deterministic error
//              propagation.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
///////////////////////////////////////////////////////////////////////

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace docext {

/// Default worker count: the number of logical CPUs, at least one.
inline unsigned default_parallelism() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Calls `fn(i)` for every i in [0, n) on at most `cap` threads (0 means
/// default_parallelism()). All indices run even if some throw; afterwards
/// the exception of the lowest failing index is rethrown, so the reported
/// error does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned cap, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(n, cap ? cap : default_parallelism());
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace docext
