// Copyright 2026 The Lacuna Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lacuna {

/// Splits [0, n) into `workers` contiguous chunks and runs
/// fn(worker, begin, end) for each, one thread per non-empty chunk beyond the
/// first. The chunking depends only on (n, workers), so callers that reduce
/// per-worker results in worker order stay deterministic. The first exception
/// (by worker index) is rethrown after all threads join.
template <typename Fn>
void parallel_chunks(std::size_t n, int workers, Fn&& fn) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n));
  if (w <= 1) {
    fn(0, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  const std::size_t base = n / w;
  const std::size_t extra = n % w;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t end = begin + base + (k < extra ? 1 : 0);
    threads.emplace_back([&, k, begin, end] {
      try {
        fn(static_cast<int>(k), begin, end);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace lacuna
