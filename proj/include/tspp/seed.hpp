#pragma once

#include <cstdint>

namespace tspp {

// SplitMix64 finalizer: a bijection on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

// Child seed for (master, replication, stream):
//   mix(mix(mix(master) ^ replication) ^ stream), mix = splitmix64.
// Distinct replications (or streams) never collide for a fixed master.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t stream);

// Stream ids reserved next to the per-policy indices 0, 1, ...
inline constexpr std::uint64_t kModelStream = ~std::uint64_t{0};
inline constexpr std::uint64_t kSweepStream = ~std::uint64_t{0} - 1;

}  // namespace tspp
