#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace quantgan {

/// splitmix64 finalizer; maps (seed, stream) to a decorrelated child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded random source. All randomness in the library flows through this type
/// so every result is a deterministic function of explicit seeds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::vector<double> normals(std::size_t n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace quantgan
