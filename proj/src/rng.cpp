#include "sig/rng.hpp"

#include "sig/error.hpp"

namespace sig {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::derive(std::uint64_t key) const { return Rng(splitmix64(seed_ ^ splitmix64(key ^ 0x5851F42D4C957F2DULL))); }

Rng Rng::derive(std::string_view label, std::uint64_t key) const {
  return Rng(splitmix64(seed_ ^ fnv1a(label)) ^ splitmix64(key + 0x2545F4914F6CDD1DULL));
}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

std::uint64_t Rng::index(std::uint64_t n) {
  if (n == 0) throw ConfigError("Rng::index: empty range");
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0) || !(scale > 0)) throw ConfigError("Rng::gamma: shape and scale must be positive");
  return std::gamma_distribution<double>(shape, scale)(engine_);
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0)) throw ConfigError("Rng::poisson: mean must be nonnegative");
  if (mean == 0) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(engine_);
}

bool Rng::coin() { return (engine_() >> 63) != 0; }

}  // namespace sig
