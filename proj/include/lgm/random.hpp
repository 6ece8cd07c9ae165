#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lgm {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of replicate `r` derived from a run seed: mix(seed, r) = splitmix64(seed ^ splitmix64(r)).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replicate) {
  return splitmix64(seed ^ splitmix64(replicate));
}

inline Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

/// Draws from the inverse Gaussian law with density
///   delta e^{delta gamma} / sqrt(2 pi) x^{-3/2} exp(-(delta^2/x + gamma^2 x)/2),
/// i.e. mean delta/gamma and variance delta/gamma^3, using the
/// transformation-with-rejection method of Michael, Schucany and Haas (1976).
class InverseGaussianSampler {
 public:
  InverseGaussianSampler(double delta, double gamma)
      : mean_(delta / gamma), shape_(delta * delta) {}

  template <class Gen>
  double operator()(Gen& gen) {
    const double v = normal_(gen);
    const double y = v * v;
    const double m = mean_;
    const double x = m + m * m * y / (2.0 * shape_) -
                     m / (2.0 * shape_) * std::sqrt(4.0 * m * shape_ * y + m * m * y * y);
    const double u = uniform_(gen);
    return u <= m / (m + x) ? x : m * m / x;
  }

 private:
  double mean_;
  double shape_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace lgm
