// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace mmw {

// Worker count cap for parallel_for. 0 restores hardware_concurrency.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs fn(i) for i in [0, count) on up to max_threads() workers. Work items
// must write to disjoint storage; result bytes must not depend on the thread
// count. Callers get determinism by reducing per-item partial results in
// item order afterwards.
void parallel_for(size_t count, const std::function<void(size_t)>& fn);

// Block arithmetic shared by every batched reduction: fixed block size keeps
// partial-sum boundaries identical no matter how many workers run.
inline constexpr size_t kGradBlock = 1024;

inline size_t block_count(size_t n, size_t block = kGradBlock) {
  return (n + block - 1) / block;
}

}  // namespace mmw
