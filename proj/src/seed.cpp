#include "tspp/seed.hpp"

namespace tspp {

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ replication) ^ stream);
}

}  // namespace tspp
