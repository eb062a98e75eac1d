#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace qcollapse {

/// Runs `body(block)` for block = 0 .. blocks-1 on up to hardware_concurrency
/// threads. Results must be written to per-block slots; the caller reduces
/// them in block order, so output never depends on the thread count.
template <typename Body>
void for_each_block(std::size_t blocks, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(blocks, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) body(b);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < blocks; b += workers) body(b);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace qcollapse
