#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fjam {

// Seeded random stream. Every consumer (fading, exploration, replay sampling,
// diffusion noise, weight init) owns its own instance so that changing one
// consumer never shifts the draws seen by another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// SplitMix64 finalizer over (seed, stream); used to derive independent
// per-consumer seeds from one run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream tags used by the trainer.
namespace streams {
inline constexpr std::uint64_t kEnvironment = 1;
inline constexpr std::uint64_t kExploration = 2;
inline constexpr std::uint64_t kReplay = 3;
inline constexpr std::uint64_t kPolicy = 4;  // action sampling while acting
inline constexpr std::uint64_t kUpdate = 5;  // diffusion noise inside gradient updates
inline constexpr std::uint64_t kCriticInit = 10;
inline constexpr std::uint64_t kActorInit = 11;  // expert k uses kActorInit + 100 * k
inline constexpr std::uint64_t kGateInit = 12;
}  // namespace streams

}  // namespace fjam
