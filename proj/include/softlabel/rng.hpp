#pragma once

#include <cstdint>

namespace softlabel {

// Counter-based splitmix64 stream. Output i is finalize(seed + (i+1)*GAMMA),
// so any position can be computed directly and substreams derived by mixing
// tags into the seed are independent of each other and of thread count.
// Algorithm name recorded in dataset metadata as "splitmix64".
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1), 53-bit resolution.
  double next_double();
  // Standard normal via Box-Muller; draws two uniforms per pair, caches the
  // second deviate.
  double next_gaussian();
  // Uniform integer in [0, n), n >= 1. Uses rejection to avoid modulo bias.
  std::uint64_t next_below(std::uint64_t n);

  static std::uint64_t finalize(std::uint64_t z);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Deterministic substream derivation. Chaining tags is order-sensitive:
// derive_seed(derive_seed(s, a), b) != derive_seed(derive_seed(s, b), a).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace softlabel
