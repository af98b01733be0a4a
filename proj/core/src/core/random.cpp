#include "haptic/core/random.hpp"

#include "haptic/core/error.hpp"

namespace haptic {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(Seed seed) : seed_(seed), engine_(mix64(seed.value)) {}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(Seed{mix64(seed_.value ^ mix64(stream + 0x632be59bd9b4e019ULL))});
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::normal(double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(engine_);
}

bool Rng::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::out_of_range, "bernoulli probability outside [0, 1]");
  }
  return std::bernoulli_distribution(p)(engine_);
}

}  // namespace haptic
