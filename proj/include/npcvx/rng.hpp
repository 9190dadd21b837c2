#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

namespace npc {

using Rng = std::mt19937_64;

/// Stable sub-seed for (master seed, component name, index). Uses FNV-1a on the
/// name and a splitmix64 finalizer, so it does not depend on std::hash.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view component, std::uint64_t index = 0) {
  return Rng(derive_seed(master, component, index));
}

/// Worker count: NP_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Results must
/// be written to per-index slots; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace npc
