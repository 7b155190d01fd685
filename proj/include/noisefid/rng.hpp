#pragma once
// Counter-based RNG (Philox4x32-10) with splittable streams.
//
// Every stochastic object in the toolkit draws from a RandomStream identified by
// (seed, stream id). Streams are stateless functions of their counter, so results
// are independent of thread count and evaluation order, and any draw can be
// reproduced in isolation. Per-object seeds are derived from a master seed with
// derive_seed(master, domain, index); the domain tag keeps unrelated consumers
// (traces, site scales, measurements, ...) on disjoint streams.

#include <array>
#include <cstdint>
#include <string_view>

namespace noisefid {

// One Philox4x32-10 block: 128-bit counter + 64-bit key -> 128 random bits.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        std::uint64_t key);

// SplitMix64 finalizer; good 64->64 bit mixer.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over a byte string; used for domain tags and config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

// Documented stream-derivation scheme: mix the master seed with a domain tag and
// a per-object index. Collision probability across distinct (domain, index) pairs
// is negligible at 64 bits.
std::uint64_t derive_seed(std::uint64_t master, std::string_view domain, std::uint64_t index);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  double uniform();   // (0, 1], 53-bit resolution
  double gaussian();  // standard normal, Box-Muller (pairs cached)

  void skip_to_block(std::uint64_t block);  // jump-ahead; 2 u64 per block

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 2;          // in u64 units; 2 == empty
  double cached_gauss_ = 0;
  bool has_cached_gauss_ = false;
};

}  // namespace noisefid
