#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sig {

// Seeded 64-bit Mersenne Twister. Sub-streams are derived from the seed and
// a key, never from the current engine state, so derive() is pure.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  Rng derive(std::uint64_t key) const;
  Rng derive(std::string_view label, std::uint64_t key = 0) const;

  double normal();
  double uniform();  // [0, 1)
  std::uint64_t index(std::uint64_t n);  // uniform on [0, n)
  double gamma(double shape, double scale);
  std::int64_t poisson(double mean);
  bool coin();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);
// FNV-1a 64-bit, used for stream labels and config fingerprints.
std::uint64_t fnv1a(std::string_view s);

}  // namespace sig
