#pragma once

#include <cstdint>
#include <random>

namespace haptic {

struct Seed {
  std::uint64_t value = 0;
  friend constexpr bool operator==(Seed, Seed) = default;
};

/// Seeded generator with deterministic child streams. Every stochastic
/// component (trial order, weight init, sensor noise) takes its own child so
/// adding draws in one place never shifts another component's stream.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(Seed seed);

  /// Child generator for a named stream. Depends only on this generator's
  /// seed and `stream`, never on how many draws were taken so far.
  Rng split(std::uint64_t stream) const;

  Seed seed() const noexcept { return seed_; }

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal(double mean = 0.0, double sd = 1.0);
  bool bernoulli(double p);

 private:
  Seed seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser, used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stream identifiers for the components that draw randomness.
namespace streams {
inline constexpr std::uint64_t schedule = 1;
inline constexpr std::uint64_t responses = 2;
inline constexpr std::uint64_t init = 3;
inline constexpr std::uint64_t sensor = 4;
inline constexpr std::uint64_t demos = 5;
}  // namespace streams

}  // namespace haptic
