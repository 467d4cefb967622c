#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace treeging {

// SplitMix64 finalizer; used to derive independent RNG streams.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the named sub-stream `stream` (and optional `sub`) under `master`.
// Pure function of its arguments, so results never depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t sub = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(master) ^ (stream + 0x632be59bd9b4e019ULL)) ^
                  (sub * 0x8cb92ba72f3d8dd7ULL + 1));
}

// Runs body(i) for i in [0, n) on up to `jobs` threads. Each index is handled
// exactly once; callers write results into slot i so output order is fixed.
// The exception from the lowest failing index is rethrown.
template <typename Body>
void parallel_for(std::size_t n, std::size_t jobs, Body&& body) {
  if (n == 0) return;
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(jobs - 1);
  for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace treeging
