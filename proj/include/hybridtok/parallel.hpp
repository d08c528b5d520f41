#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace hybridtok {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Indices are split into
// contiguous stripes; the first exception thrown is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Renders n records in parallel, block by block, and hands them to `sink` in
// index order. Output is independent of the thread count.
template <typename Render, typename Sink>
void ordered_emit(std::size_t n, unsigned threads, Render&& render, Sink&& sink,
                  std::size_t block = 4096) {
  std::vector<std::string> lines;
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t count = std::min(block, n - start);
    lines.assign(count, std::string());
    parallel_for(count, threads, [&](std::size_t i) { lines[i] = render(start + i); });
    for (auto& l : lines) sink(l);
  }
}

}  // namespace hybridtok
