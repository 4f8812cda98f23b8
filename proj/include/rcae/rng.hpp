#pragma once

#include <cstdint>
#include <random>

// Bit-portable randomness.  mt19937_64 has a standard-pinned output sequence,
// and the uniform/gaussian mappings below are written out explicitly because
// std::normal_distribution is implementation-defined.  Identical seeds give
// identical streams on every platform.

namespace rcae {

// splitmix64; used to derive decorrelated per-channel seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Channel c of a run seeded with s draws from mt19937_64(mix_seed(s + c * 0x9E3779B97F4A7C15)).
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t channel);

class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1): top 53 bits of one engine draw.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the pair partner is cached.
  double gaussian();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rcae
